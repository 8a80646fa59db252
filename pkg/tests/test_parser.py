from __future__ import annotations

import pytest

from aldwych import ast as A
from aldwych import pretty
from aldwych.errors import DuplicateProcedure, MultipleAnonymousReturns, ParseError
from aldwych.parser import parse
from conftest import CORPUS

CORPUS_FILES = sorted(p.stem for p in CORPUS.glob("*.aw"))


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_corpus_parses(name):
    prog = parse((CORPUS / f"{name}.aw").read_text())
    assert prog.declarations


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_pretty_print_round_trips(name):
    once = pretty.program(parse((CORPUS / f"{name}.aw").read_text()))
    assert pretty.program(parse(once)) == once


def test_header_parts():
    d = parse("#p (u, v) → (x, y) { v=e || x←u, y=b }").declarations[0]
    h = d.header
    assert [p.name for p in h.inputs] == ["u", "v"]
    assert [p.name for p in h.outputs] == ["x", "y"]
    assert h.anon is None


def test_anonymous_outputs():
    assert parse("#f(x) < { | <=x }").declarations[0].header.anon == "<"
    assert parse("#o() ~ { a- |>=b }").declarations[0].header.anon == "~"


def test_curried_header():
    h = parse("#above(k)[X] < { | <=k }").declarations[0].header
    assert [p.name for p in h.inputs] == ["k"]
    assert [p.name for p in h.curried] == ["X"]


def test_bars_and_otherwise_groups():
    d = parse((CORPUS / "s8_max.aw").read_text()).declarations[0]
    assert len(d.groups) == 2
    assert [r.bars for g in d.groups for r in g] == [2, 2]


def test_embedded_block_and_triple_bar():
    d = parse((CORPUS / "s9_delbetween.aw").read_text()).declarations[0]
    first = d.groups[0][0]
    assert first.body is not None
    inner = [r.bars for g in first.body for r in g]
    assert inner == [2, 1, 3]


def test_lookahead_split_recorded():
    d = parse((CORPUS / "s5_ordmerge.aw").read_text()).declarations[0]
    r = d.groups[0][0]
    gets = [it for it in r.lhs if isinstance(it, A.ChannelGet)]
    assert gets[0].lookahead is None
    assert gets[1].lookahead == 0
    guards = [it for it in r.lhs if isinstance(it, A.Guard)]
    assert guards[0].op == ">="


def test_constant_versus_variable_by_context():
    r = parse("#p (in) →out { in.a | out.b }").declarations[0].groups[0][0]
    get = r.lhs[0]
    assert isinstance(get.items[0][1], A.Const)
    r = parse("#p (in) →out { in?a | out^a }").declarations[0].groups[0][0]
    assert isinstance(r.lhs[0].items[0][1], A.Var)


def test_duplicate_procedure_rejected():
    with pytest.raises(DuplicateProcedure):
        parse("#p(x) { x=a || } #p(y) { y=a || }")


def test_mixed_anonymous_and_named_outputs_rejected():
    with pytest.raises((MultipleAnonymousReturns, ParseError)):
        parse("#p(x) → (y, <) { | y=x }")


@pytest.mark.parametrize("src", ["#p(x { }", "#p(x) { x= | }", "#(x) { }", "#p(x) { x=a || y=b"])
def test_syntax_errors_have_positions(src):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.span.line >= 1


def test_delbetween_rule_total():
    d = parse((CORPUS / "s9_delbetween.aw").read_text()).declarations[0]
    outer = [r for g in d.groups for r in g]
    inner = [r for o in outer if o.body for g in o.body for r in g]
    # two outer rule groups holding three rules, plus three embedded rules
    assert (len(d.groups), len(outer), len(inner)) == (2, 3, 3)


def _names(node, acc):
    if isinstance(node, A.Var):
        acc.add(node.name)
    elif isinstance(node, A.Param):
        acc.add(node.name)
    elif isinstance(node, list):
        for x in node:
            _names(x, acc)
    elif hasattr(node, "__dataclass_fields__"):
        for f in node.__dataclass_fields__:
            _names(getattr(node, f), acc)
        for attr in ("outs",):
            for o in getattr(node, attr, []) or []:
                if isinstance(o, str):
                    acc.add(o)
    return acc


def test_handle_kind_tagging_in_object_examples():
    names: set = set()
    for f in ("s6_handles_p", "s6_invalid_fragment", "s6_message_p"):
        _names(parse((CORPUS / f"{f}.aw").read_text()), names)
    assert {n for n in names if A.is_handle_name(n)} == {"S", "T", "H", "R", "Q"}
