from __future__ import annotations

import random

import pytest

from aldwych.core import parse_core
from aldwych.runtime import (
    FALSE,
    NIL,
    TRUE,
    Cell,
    Commit,
    Deadlocked,
    FailAll,
    Quiesced,
    RTuple,
    StepLimit,
    SuspendOn,
    System,
    atom,
    call,
    deref,
    eval_guard,
    from_python,
    run_program,
    show,
    to_python,
    try_match,
)
from conftest import compile_names
from helpers import sorted_merge


def test_deref_follows_and_compresses_aliases():
    a, b, c = Cell(1), Cell(2), Cell(3)
    a.value, b.value, c.value = b, c, 7
    assert deref(a) == 7
    assert a.value == 7


def test_terms_round_trip_through_python():
    v = ["a", 3, ("f", "x", [1, 2])]
    assert to_python(from_python(v)) == v


def test_show_is_canonical():
    assert show(from_python(["a", 1])) == "a : 1 : $"
    assert show(from_python(("f", "Big", 2))) == "f('Big', 2)"


def test_eval_guard_three_valued():
    c = Cell(1)
    assert eval_guard(">", 3, 2) is True
    assert eval_guard("=<", 3, 2) is False
    assert eval_guard(">=", c, 2) is None
    assert eval_guard("==", atom("a"), atom("a")) is True
    assert eval_guard("!=", atom("a"), atom("b")) is True


def test_double_write_faults():
    sys = System(parse_core("%aldwych-core 1\n"))
    c = sys.new_cell()
    sys.bind(None, c, 1)
    from aldwych.runtime import RuntimeFault

    with pytest.raises(RuntimeFault) as info:
        sys.bind(None, c, 2)
    assert info.value.kind == "DoubleWrite"


def test_try_match_suspends_then_commits():
    core = compile_names("s4_p")
    p = core.proc("p")
    inp, out = Cell(1), Cell(2)
    r = try_match(p, [inp, out])
    assert isinstance(r, SuspendOn) and inp in r.cells
    inp.value = from_python(["a"])
    r = try_match(p, [inp, out])
    assert isinstance(r, Commit) and r.rule == 0


def test_try_match_fails_on_unknown_constant():
    core = compile_names("s4_p")
    r = try_match(core.proc("p"), [from_python(["zzz"]), Cell(1)])
    assert isinstance(r, FailAll)


def test_match_depth_exact():
    # the element itself may stay unbound; only the cons cell must exist
    core = compile_names("s4_merge")
    head = Cell(5)
    r = try_match(core.proc("merge"), [RTuple(":", (head, NIL)), Cell(6), Cell(7)], random.Random(0))
    assert isinstance(r, Commit)


def test_otherwise_waits_for_first_group():
    core = compile_names("s8_max")
    a, b = Cell(1), Cell(2)
    assert isinstance(try_match(core.proc("max"), [a, 5, Cell(3)]), SuspendOn)
    r = try_match(core.proc("max"), [3, 5, Cell(3)])
    assert isinstance(r, Commit) and r.rule == 1


def test_otherwise_no_early_reduce_in_trace():
    core = compile_names("s8_max")
    for seed in range(20):
        sys = System(core, seed, True)
        a, b, r = sys.new_cell(), sys.new_cell(), sys.new_cell()
        sys.spawn("max", [a, b, r])
        sys.bind(None, b, 9)
        sys.run()
        assert not any(" REDUCE " in l for l in sys.trace)
        sys.bind(None, a, 4)
        sys.run()
        assert [l.split(" ")[3] for l in sys.trace if " REDUCE " in l] == ["max/rule2"]
        assert deref(r) == 9


def test_builtins_arithmetic():
    core = parse_core("%aldwych-core 1\n")
    for name, a, b, want in [("add", 2, 3, 5), ("sub", 2, 3, -1), ("mul", 4, 5, 20), ("div", 7, 2, 3), ("div", -7, 2, -3)]:
        _, out, _ = call(core, name, [a, b])
        assert out == [want]
    _, out, _ = call(core, "gt", [3, 1])
    assert out == ["true"]


def test_division_by_zero_is_a_fault():
    core = parse_core("%aldwych-core 1\n")
    outcome, out, sys = call(core, "div", [1, 0], trace=True)
    assert sys.faults and sys.faults[0][1] == "DivisionByZero"
    assert any(" FAULT " in line for line in sys.trace)


def test_builtin_merge_preserves_order():
    core = parse_core("%aldwych-core 1\n")
    for seed in range(30):
        _, (out,), _ = call(core, "merge", [[1, 2, 3], ["a", "b"]], seed=seed)
        assert [x for x in out if isinstance(x, int)] == [1, 2, 3]
        assert [x for x in out if isinstance(x, str)] == ["a", "b"]


def test_ordmerge_is_determinate():
    core = compile_names("s5_ordmerge")
    rng = random.Random(7)
    for _ in range(20):
        a = sorted(rng.randint(0, 30) for _ in range(rng.randint(0, 8)))
        b = sorted(rng.randint(0, 30) for _ in range(rng.randint(0, 8)))
        for seed in range(3):
            _, (out,), _ = call(core, "ordmerge", [a, b], seed=seed)
            assert out == sorted_merge(a, b)


def test_trace_format():
    core = compile_names("s4_p")
    _, _, sys = call(core, "p", [["a", "c"]], trace=True)
    first = sys.trace[0].split(" ", 3)
    assert first[0] == "1" and first[1] == "SPAWN"
    kinds = {line.split(" ")[1] for line in sys.trace}
    assert {"SPAWN", "REDUCE", "BIND", "QUIESCE"} <= kinds
    assert any(line.split(" ", 3)[3] == "p/rule1" for line in sys.trace if " REDUCE " in line)
    seqs = [int(line.split(" ")[0]) for line in sys.trace]
    assert seqs == list(range(1, len(seqs) + 1))


def test_commitment_is_final():
    core = compile_names("s5_ordmerge")
    _, _, sys = call(core, "ordmerge", [[1, 4], [2, 3]], seed=3, trace=True)
    reduced = [line.split(" ")[2] for line in sys.trace if " REDUCE " in line]
    assert len(reduced) == len(set(reduced))


def test_suspend_and_wake_events():
    core = compile_names("s4_p")
    sys = System(core, 0, True)
    inp, out = sys.new_cell(), sys.new_cell()
    sys.spawn("p", [inp, out])
    sys.run()
    assert any(" SUSPEND " in l for l in sys.trace)
    sys.bind(None, inp, from_python(["a"]))
    assert any(" WAKE " in l for l in sys.trace)


def test_outcomes():
    core = compile_names("deadlock")
    outcome, sys, _ = run_program(core)
    assert isinstance(outcome, Deadlocked) and len(outcome.pids) == 2
    core = compile_names("s4_p")
    assert isinstance(call(core, "p", [["a"]])[0], Quiesced)
    loop = parse_core("%aldwych-core 1\nproc spin(x) -> ()\n  group\n    rule\n      call spin(x) -> ()\nend\n")
    assert isinstance(call(loop, "spin", [1], max_steps=50)[0], StepLimit)


def test_same_seed_same_trace():
    core = compile_names("s4_merge")
    t1 = call(core, "merge", [[1, 2, 3], [4, 5]], seed=11, trace=True)[2].trace
    t2 = call(core, "merge", [[1, 2, 3], [4, 5]], seed=11, trace=True)[2].trace
    assert t1 == t2


def test_booleans_are_atoms():
    assert TRUE == atom("true") and FALSE == atom("false")


def test_delcountbetween_matches_reference():
    from helpers import delete_count_between

    core = compile_names("s9_delcountbetween")
    rng = random.Random(5)
    for i in range(60):
        s = [rng.choice(["a", "b", "stop", "start"]) for _ in range(rng.randint(0, 12))]
        _, outs, _ = call(core, "delcountbetween", [s], seed=i)
        assert tuple(outs) == delete_count_between(s)
