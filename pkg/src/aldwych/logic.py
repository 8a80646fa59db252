"""Translation of core programs to flat concurrent-logic clauses.

Each rule becomes one clause ``head :- guards | body.``  Head arguments are
the procedure's inputs then outputs, with matched inputs replaced by their
patterns.  Rule groups after the first are introduced by an ``% otherwise``
comment line.
"""

from __future__ import annotations

import re

from .core import CConst, CNum, CoreProc, CoreProgram, CoreRule, CTuple, CVar

_PLAIN = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def _atom(name: str) -> str:
    if _PLAIN.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


class _Names:
    """Capitalised, clause-unique logic variable names."""

    def __init__(self):
        self.map: dict[str, str] = {}
        self.used: set[str] = set()

    def __call__(self, name: str) -> str:
        got = self.map.get(name)
        if got is not None:
            return got
        base = re.sub(r"[^A-Za-z0-9_]", "_", name).strip("_") or "V"
        base = base[0].upper() + base[1:]
        if not base[0].isalpha():
            base = "V" + base
        cand, k = base, 1
        while cand in self.used:
            k += 1
            cand = f"{base}{k}"
        self.used.add(cand)
        self.map[name] = cand
        return cand


def _term(t, names: _Names, subst: dict) -> str:
    if isinstance(t, CVar):
        if t.name in subst:
            return _term(subst[t.name], names, subst)
        return names(t.name)
    if isinstance(t, CConst):
        return "[]" if t.name == "$" else _atom(t.name)
    if isinstance(t, CNum):
        return str(t.value)
    if t.tag == ":" and len(t.args) == 2:
        items = []
        cur = t
        while isinstance(cur, CTuple) and cur.tag == ":" and len(cur.args) == 2:
            items.append(_term(cur.args[0], names, subst))
            cur = cur.args[1]
            if isinstance(cur, CVar) and cur.name in subst:
                cur = subst[cur.name]
        if isinstance(cur, CConst) and cur.name == "$":
            return "[" + ", ".join(items) + "]"
        return "[" + ", ".join(items) + " | " + _term(cur, names, subst) + "]"
    return _atom(t.tag) + "(" + ", ".join(_term(a, names, subst) for a in t.args) + ")"


_REL = {"<=": "=<", "==": "==", "!=": "\\=="}


def clause(proc: CoreProc, rule: CoreRule) -> str:
    names = _Names()
    subst: dict = {}
    for var, pat in rule.matches:
        subst[var] = pat
    head_args = [_term(CVar(p), names, subst) for p in proc.ins + proc.outs]
    head = _atom(proc.name) + ("(" + ", ".join(head_args) + ")" if head_args else "")
    guards = [f"{_term(a, names, subst)} {_REL.get(op, op)} {_term(b, names, subst)}" for op, a, b in rule.guards]
    body = []
    for c in rule.calls:
        args = [_term(a, names, subst) for a in c.ins] + [_term(CVar(o), names, subst) for o in c.outs]
        body.append(_atom(c.name) + ("(" + ", ".join(args) + ")" if args else ""))
    for var, t in rule.binds:
        body.append(f"{_term(CVar(var), names, subst)} = {_term(t, names, subst)}")
    text = head + " :- "
    if guards:
        text += ", ".join(guards) + " | "
    text += ", ".join(body) if body else "true"
    return text + "."


def emit_logic(prog: CoreProgram) -> str:
    lines: list[str] = []
    for proc in prog.procedures:
        for gi, group in enumerate(proc.groups):
            if gi:
                lines.append("% otherwise")
            for rule in group:
                lines.append(clause(proc, rule))
        lines.append("")
    return "\n".join(lines).rstrip("\n") + ("\n" if lines else "")
