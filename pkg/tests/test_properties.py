from __future__ import annotations

import random
import re
from collections import Counter

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import gen
from aldwych import compile_source, format_core, pretty
from aldwych.core import parse_core, term_vars
from aldwych.desugar import PASSES, lower_surface, run_pass
from aldwych.normalize import alpha_equivalent
from aldwych.parser import parse
from aldwych.runtime import System, call, spawn_system
from conftest import CORPUS, compile_names, source
from helpers import interleavings

DRIVERS = {
    "lists_main": ["s7_lists"],
    "elephant_main": ["s8_royal_elephant"],
    "filter_main": ["s7_lists", "s9_filter_concise"],
    "destructor_main": ["s6_message_p"],
    "counter_main": ["s6_counter"],
    "square_main": ["s8_square"],
}
VALID = sorted(p.stem for p in CORPUS.glob("*.aw") if p.stem not in ("s6_invalid_fragment", "s6_message_p_converted"))
seeds = st.integers(min_value=0, max_value=10**9)
fast = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def generated(seed: int):
    rng = random.Random(seed)
    src = gen.program(rng)
    res = compile_source(src)
    assert res.ok, (src, [d.format() for d in res.diagnostics if d.is_error])
    return src, res.core, gen.argv(rng)


def rule_writer_counts(proc, rule):
    """Writer and reader occurrence counts for the variables of one rule."""
    writers, readers = Counter(), Counter()
    for v, t in rule.binds:
        writers[v] += 1
        for x in term_vars(t):
            (writers if x.reply else readers)[x.name] += 1
    for c in rule.calls:
        for a in c.ins:
            for x in term_vars(a):
                (writers if x.reply else readers)[x.name] += 1
        for o in c.outs:
            writers[o] += 1
    for _, a, b in rule.guards:
        for t in (a, b):
            readers.update(x.name for x in term_vars(t))
    return writers, readers


def assert_writer_counts(core):
    for proc in core.procedures:
        params = set(proc.ins + proc.outs)
        for rule in proc.rules:
            captured = {v.name for _, p in rule.matches for v in term_vars(p)}
            writers, readers = rule_writer_counts(proc, rule)
            assert all(n == 1 for n in writers.values()), (proc.name, writers)
            for v in set(writers) | set(readers):
                if v not in params and v not in captured:
                    assert writers[v] == 1 and readers[v] >= 1, (proc.name, v)


def assert_kind_erased(core):
    text = format_core(core)
    names = set(re.findall(r"(?<!')\b([A-Za-z][A-Za-z0-9_%']*)\b(?!')", text))
    for proc in core.procedures:
        for v in proc.ins + proc.outs:
            assert not v[0].isupper()
        for rule in proc.rules:
            for _, p in rule.matches:
                assert all(not x.name[0].isupper() for x in term_vars(p))
            for v, t in rule.binds:
                assert not v[0].isupper()
                assert all(not x.name[0].isupper() for x in term_vars(t))
            for c in rule.calls:
                assert all(not o[0].isupper() for o in c.outs)
    assert names  # sanity: the text was produced


# ---------------------------------------------------------------- compiler


@pytest.mark.parametrize("name", VALID)
def test_corpus_core_invariants(name):
    core = compile_names(name)
    assert_kind_erased(core)
    assert_writer_counts(core)
    assert alpha_equivalent(core, parse_core(format_core(core)))


@given(seeds)
@fast
def test_generated_core_invariants(seed):
    _, core, _ = generated(seed)
    assert_kind_erased(core)
    assert_writer_counts(core)
    assert alpha_equivalent(core, parse_core(format_core(core)))


def _stages_idempotent(src: str):
    prog = parse(src)
    for name in PASSES[:9]:
        out = lower_surface(prog, name)
        assert pretty.program(run_pass(name, out)) == pretty.program(out), name


@pytest.mark.parametrize("name", VALID)
def test_corpus_passes_idempotent(name):
    _stages_idempotent(source(name))


@given(seeds)
@fast
def test_generated_passes_idempotent(seed):
    _stages_idempotent(generated(seed)[0])


@given(seeds)
@fast
def test_stage_consistency(seed):
    # each stage is exactly the previous stage plus one pass
    prog = parse(generated(seed)[0])
    prev = lower_surface(prog, PASSES[1])
    for name in PASSES[2:9]:
        nxt = lower_surface(prog, name)
        assert pretty.program(nxt) == pretty.program(run_pass(name, prev)), name
        prev = nxt


@given(seeds)
@fast
def test_pretty_round_trip_generated(seed):
    once = pretty.program(parse(generated(seed)[0]))
    assert pretty.program(parse(once)) == once


# ------------------------------------------------------------------ runtime


def test_fuzz_no_double_writes():
    """1000 random well-moded programs: no cell is ever written twice."""
    for seed in range(1000):
        _, core, args = generated(seed)
        sys, _ = spawn_system(core, "main", args, seed)
        sys.run(5000)
        assert sys.double_writes == 0
        assert sys.max_writes <= 1


@given(seeds, st.integers(min_value=0, max_value=1000))
@fast
def test_same_seed_same_run(seed, run_seed):
    _, core, args = generated(seed)
    traces = []
    for _ in range(2):
        sys, _ = spawn_system(core, "main", args, run_seed, trace=True)
        sys.run(5000)
        traces.append(sys.trace)
    assert traces[0] == traces[1]


@given(seeds)
@fast
def test_wake_makes_progress(seed):
    """After a WAKE, the process never suspends again on the waking cell."""
    _, core, args = generated(seed)
    sys, _ = spawn_system(core, "main", args, seed, trace=True)
    sys.run(5000)
    woken: dict[str, str] = {}
    for line in sys.trace:
        _, kind, pid, *rest = line.split(" ", 3)
        detail = rest[0] if rest else ""
        if kind == "WAKE":
            woken[pid] = detail.split()[-1]
        elif kind == "SUSPEND" and pid in woken:
            assert woken.pop(pid) not in detail.split()[-1].split(",")
        elif kind == "REDUCE":
            woken.pop(pid, None)


@given(
    st.lists(st.integers(0, 9), max_size=4),
    st.lists(st.integers(10, 19), max_size=4),
    st.integers(0, 10**6),
)
@settings(max_examples=200, deadline=None)
def test_compiled_merge_matches_builtin(a, b, seed):
    """Source-level merge and the built-in merge both yield order-preserving
    interleavings."""
    allowed = interleavings(a, b)
    compiled = compile_names("s4_merge")
    builtin = parse_core("%aldwych-core 1\n")
    for prog in (compiled, builtin):
        _, (out,), _ = call(prog, "merge", [a, b], seed=seed)
        assert tuple(out) in allowed


def test_compiled_and_builtin_merge_reach_same_outputs():
    compiled = compile_names("s4_merge")
    builtin = parse_core("%aldwych-core 1\n")
    a, b = [1, 2], [3]
    seen = []
    for prog in (compiled, builtin):
        seen.append({tuple(call(prog, "merge", [a, b], seed=s)[1][0]) for s in range(300)})
    assert seen[0] == seen[1] == interleavings(a, b)
