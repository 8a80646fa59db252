"""Random well-moded stream programs.

Every generated procedure reads one input stream and writes one output
stream; each rule writes its output exactly once, so the programs pass the
mode check by construction while still exercising committed choice,
otherwise groups, guards, hand-offs and merges.
"""

from __future__ import annotations

import random

CONSTS = ["a", "b", "c"]


def _lhs(rng: random.Random) -> str:
    r = rng.random()
    if r < 0.35:
        return "in." + rng.choice(CONSTS)
    if r < 0.55:
        return f"in?m, m == '{rng.choice(CONSTS)}'"
    return "in?m"


def _items(rng: random.Random, has_m: bool) -> list[str]:
    items = []
    for _ in range(rng.randint(0, 2)):
        items.append("m" if has_m and rng.random() < 0.5 else "'" + rng.choice(CONSTS) + "'")
    if has_m and "m" not in items:
        items.append("m")
    return items


def _rule(rng: random.Random, nprocs: int) -> str:
    lhs = _lhs(rng)
    items = _items(rng, "m" in lhs)
    tail = rng.random()
    if tail < 0.55:
        puts = ", ".join(f"out^{x}" if x == "m" else f"out.{x.strip(chr(39))}" for x in items)
        return f"{lhs} | {puts}" if puts else f"{lhs} |"
    if tail < 0.65:
        term = " : ".join(items + ["$"]) if items else "$"
        return f"{lhs} || out = {term}" if items else f"{lhs} || out$"
    j = rng.randrange(nprocs)
    if tail < 0.85:
        stmts = [f"p{j}(in) → rest"]
    else:
        k = rng.randrange(nprocs)
        stmts = [f"p{j}(in) → r1", f"p{k}(in) → r2", "merge(r1, r2) → rest"]
    stmts.append(f"out = {' : '.join(items + ['rest'])}" if items else "out ← rest")
    return f"{lhs} || " + ", ".join(stmts)


def proc(rng: random.Random, k: int, nprocs: int) -> str:
    groups = [[_rule(rng, nprocs) for _ in range(rng.randint(1, 3))]]
    if rng.random() < 0.5:
        groups.append(["in?m | out^m"])
    body = "\n:\n".join(";\n".join("  " + r for r in g) for g in groups)
    return f"#p{k}(in) → out\n{{\n{body};\n  in$ || out$\n}}\n"


def program(rng: random.Random) -> str:
    n = rng.randint(1, 3)
    procs = [proc(rng, k, n) for k in range(n)]
    return "\n".join(procs) + "\n#main(argv) → out\n{ || p0(argv) → out\n}\n"


def argv(rng: random.Random) -> list[str]:
    return [rng.choice(CONSTS + ["d"]) for _ in range(rng.randint(0, 6))]
