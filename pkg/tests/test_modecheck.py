from __future__ import annotations

import pytest

from aldwych import compile_source
from aldwych.desugar import lower_surface
from aldwych.modecheck import check_ensemble, check_program, kind
from aldwych.parser import parse
from conftest import CORPUS, source

VALID_LISTINGS = sorted(
    p.stem for p in CORPUS.glob("*.aw") if p.stem not in ("s6_invalid_fragment", "s6_message_p_converted")
)


def codes(src: str, errors_only: bool = True) -> list[str]:
    return [d.code for d in compile_source(src).diagnostics if d.is_error or not errors_only]


def test_kind_from_capitalization():
    assert kind("x") == "future"
    assert kind("Self") == "handle"


@pytest.mark.parametrize("name", VALID_LISTINGS)
def test_listings_have_no_errors(name):
    assert codes(source(name)) == []


def test_converted_listing_is_core_level():
    # back-communication slots on plain futures are rejected at the surface
    assert codes(source("s6_message_p_converted"))


@pytest.mark.parametrize(
    "src, code",
    [
        ("#p (u) → (x, y) { u=f(w) || x←w }", "MissingWriter"),
        ("#p (u) → z { u=a || q()→z, r()→z }", "MultipleWriters"),
        ("#p (u) → z { u=a || u=b, z=a }", "WriteToInput"),
        ("#p (u, H) → z { u=a || z=k(H, u) }", "HandleInFutureTuple"),
        ("#p (P, Q) → H { H?m | P^m, Q^m }", "RelayDuplicated"),
        ("#p (P) → H { H?m | }", "RelayDropped"),
        ("#q(a) → b { || b=a }\n#p(x) → z { || q(x, x) → z }", "ArityMismatch"),
        ("#p(x) → z { || q(x)→z, Q.foo }", "UnwrittenFuture"),
        ("#p(x) → z { || q(x)→z, q(x)→w }", "UnreadFuture"),
    ],
)
def test_violations(src, code):
    assert code in codes(src)


def test_invalid_fragment_rejected():
    assert codes(source("s6_invalid_fragment")) == ["HandleInFutureTuple"]


def test_unused_input_is_only_a_warning():
    diags = compile_source("#p(x, y) → z { x=a || z=b }").diagnostics
    assert [d.code for d in diags if d.is_error] == []
    assert "UnusedInput" in [d.code for d in diags]


def test_unknown_procedure_is_a_warning():
    diags = compile_source("#p(x) → z { || mystery(x) → z }").diagnostics
    assert [(d.severity, d.code) for d in diags] == [("WARNING", "UnknownProcedure")]


def test_handle_alias_between_handles_is_clean():
    # the input handle is rebound for the recursive call
    assert codes("#p(x, S, R) { x=a | S←R }") == []


def test_relay_clean_on_delegation():
    assert codes(source("s8_royal_elephant")) == []


def test_ensemble_counts():
    assert check_ensemble([("p", ["x"], ["y"]), ("q", ["y"], ["x"])]) == []
    assert check_ensemble([("p", ["x"], ["y"]), ("q", ["y"], [])], external={"x"}) == []
    assert sorted(d.code for d in check_ensemble([("p", ["x"], ["y"])])) == ["UnreadFuture", "UnwrittenFuture"]
    assert [d.code for d in check_ensemble([("p", [], ["y"]), ("q", ["y"], ["y"])])] == ["MultipleWriters"]


def test_check_program_directly_on_lowered_corpus():
    decls = lower_surface(parse(source("s5_ordmerge"))).declarations
    assert [d for d in check_program(decls) if d.is_error] == []


def test_diagnostic_format():
    (d,) = [d for d in compile_source("#p (u) → z { u=a || u=b, z=a }").diagnostics if d.is_error]
    line = d.format("f.aw")
    assert line.startswith("ERROR WriteToInput f.aw:")
