from __future__ import annotations

import random
import time

import pytest

from aldwych.core import CoreCall, CoreProc, CoreProgram, CoreRule, CTuple, CVar, parse_core
from aldwych.normalize import alpha_equivalent, normalize_program
from conftest import compile_names


def rename_program(prog: CoreProgram, rng: random.Random) -> CoreProgram:
    """Consistently rename every variable, per procedure, and shuffle rules
    within each group."""
    out = []
    for p in prog.procedures:
        names: dict[str, str] = {}

        def n(x):
            if x not in names:
                names[x] = f"v{len(names)}_{rng.randint(0, 999)}"
            return names[x]

        def t(term):
            if isinstance(term, CVar):
                return CVar(n(term.name), term.reply)
            if isinstance(term, CTuple):
                return CTuple(term.tag, tuple(t(a) for a in term.args))
            return term

        groups = []
        for g in p.groups:
            rules = [
                CoreRule(
                    [(n(v), t(pt)) for v, pt in r.matches],
                    [(op, t(a), t(b)) for op, a, b in r.guards],
                    [(n(v), t(x)) for v, x in r.binds],
                    [CoreCall(c.name, tuple(t(a) for a in c.ins), tuple(n(o) for o in c.outs)) for c in r.calls],
                )
                for r in g
            ]
            rng.shuffle(rules)
            groups.append(rules)
        out.append(CoreProc(p.name, [n(x) for x in p.ins], [n(x) for x in p.outs], groups))
    return CoreProgram(out, prog.entry)


@pytest.mark.parametrize("name", ["s4_merge", "s5_ordmerge", "s6_message_p", "s9_delcountbetween", "s6_counter"])
def test_renaming_preserves_equivalence(name):
    core = compile_names(name)
    rng = random.Random(1)
    for _ in range(3):
        assert alpha_equivalent(core, rename_program(core, rng))


def test_different_programs_are_not_equivalent():
    assert not alpha_equivalent(compile_names("s4_p"), compile_names("s4_merge"))
    assert not alpha_equivalent(compile_names("s9_delbetween"), compile_names("s9_delcountbetween"))


def test_constant_change_detected():
    a = compile_names("s4_p")
    b = parse_core(__import__("aldwych").format_core(a).replace("'d'", "'e'"))
    assert not alpha_equivalent(a, b)


MERGE_LEFT = """%aldwych-core 1
proc p(a, b, c) -> (o)
  group
    rule
      call merge(a, b) -> (t)
      call merge(t, c) -> (o)
end
"""
MERGE_RIGHT = """%aldwych-core 1
proc p(a, b, c) -> (o)
  group
    rule
      call merge(b, c) -> (t)
      call merge(a, t) -> (o)
end
"""


def test_merge_tree_shape_is_normalized():
    assert alpha_equivalent(parse_core(MERGE_LEFT), parse_core(MERGE_RIGHT))


def test_merge_normalization_keeps_leaves():
    other = MERGE_RIGHT.replace("merge(a, t)", "merge(b, t)")
    assert not alpha_equivalent(parse_core(MERGE_LEFT), parse_core(other))


def test_tag_mapping():
    a = compile_names("s4_p")
    b = parse_core(__import__("aldwych").format_core(a).replace("':'", "'f'").replace("'$'", "'end'"))
    assert not alpha_equivalent(a, b)
    assert alpha_equivalent(a, b, None, {"f": ":", "end": "$"})


def test_normalize_is_idempotent():
    from aldwych.core import format_core

    core = compile_names("s6_message_p")
    once = normalize_program(core)
    assert format_core(normalize_program(once)) == format_core(once)


def test_equivalence_is_fast():
    core = compile_names("s6_message_p")
    t = time.perf_counter()
    alpha_equivalent(core, rename_program(core, random.Random(3)))
    assert time.perf_counter() - t < 1.0
