"""Surface syntax tree.

Nodes are plain dataclasses.  ``span`` fields are excluded from equality so
that two parses of the same program text compare equal even after
pretty-printing moves tokens around.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import NOSPAN, Span


def _span() -> Span:
    return field(default=NOSPAN, compare=False, repr=False)


def is_handle_name(name: str) -> bool:
    return bool(name) and (name[0].isupper() or name == "~")


# ---------------------------------------------------------------- expressions


@dataclass
class Var:
    name: str
    span: Span = _span()

    @property
    def is_handle(self) -> bool:
        return is_handle_name(self.name)


@dataclass
class Const:
    name: str
    span: Span = _span()


@dataclass
class Num:
    value: int
    span: Span = _span()


@dataclass
class Tup:
    """Tuple term ``f(a, b)``; cons is ``Tup(':', [h, t])``."""

    tag: str
    args: list["Expr"]
    span: Span = _span()


@dataclass
class Msg:
    """A message ``name(args) -> outs`` (name ``''`` for the nil-name message)."""

    name: str
    args: list["Expr"]
    outs: list[str] = field(default_factory=list)
    anon: bool = False  # trailing ``-`` anonymous return on a pattern
    span: Span = _span()


@dataclass
class Call:
    name: str
    args: list["Expr"]
    span: Span = _span()


@dataclass
class NamedArg:
    """``Name <- Expr`` overriding a defaulted parameter at a call site."""

    name: str
    value: "Expr"
    span: Span = _span()


@dataclass
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass
class DotSend:
    """``target.m1.m2`` as a value: every message goes to ``target``."""

    target: "Expr"
    msgs: list[Msg]
    span: Span = _span()


@dataclass
class TildeChain:
    """``target~m1~m2``: each message goes to the previous reply."""

    target: "Expr"
    msgs: list[Msg]
    span: Span = _span()


@dataclass
class Juxt:
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass
class AnonSelf:
    """``~`` (anonymous handle) or ``<`` (anonymous value) used as a value."""

    which: str
    span: Span = _span()


Expr = Union[Var, Const, Num, Tup, Msg, Call, NamedArg, BinOp, DotSend, TildeChain, Juxt, AnonSelf]


# ------------------------------------------------------------------ lhs items


@dataclass
class Match:
    """``u = f(w)`` on a left hand side."""

    var: str
    pattern: Expr
    span: Span = _span()


@dataclass
class ChannelGet:
    """Stream/handle input.

    ``name`` is None for a bare message pattern (broadcast to all output
    handles).  Each item is ``('.', pattern)`` or ``('?', Var)``.  When
    ``lookahead`` is not None, items from that index on are viewed but not
    consumed.
    """

    name: str | None
    items: list[tuple[str, Expr]]
    lookahead: int | None = None
    span: Span = _span()


@dataclass
class Close:
    name: str
    span: Span = _span()


@dataclass
class Guard:
    op: str
    left: Expr
    right: Expr
    span: Span = _span()


LhsItem = Union[Match, ChannelGet, Close, Guard]


# ----------------------------------------------------------------- statements


@dataclass
class Bind:
    """``x = term``: write a tuple or constant."""

    name: str
    term: Expr
    span: Span = _span()


@dataclass
class Alias:
    """``x <- expr``."""

    name: str
    expr: Expr
    span: Span = _span()


@dataclass
class ProcessCall:
    """``expr -> outs``; ``expr`` is a Call or a message send chain."""

    expr: Expr
    outs: list[str]
    span: Span = _span()


@dataclass
class ChannelPut:
    """``x.b^c.d(a)`` / ``H.m(a)->r`` / ``x$``: items are ``('.', term)`` or
    ``('^', expr)``; ``close`` appends the nil terminator."""

    name: str
    items: list[tuple[str, Expr]]
    close: bool = False
    span: Span = _span()


@dataclass
class AnonReturn:
    """``>V`` (alias) or ``>=c`` (bind)."""

    value: Expr
    bind: bool = False
    span: Span = _span()


@dataclass
class Become:
    value: Expr
    span: Span = _span()


@dataclass
class LocalDecl:
    names: list[str]
    span: Span = _span()


@dataclass
class Branch:
    bars: int | None
    stmts: list["Statement"]
    body: list[list["Rule"]] | None = None
    versions: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass
class IfThenElse:
    cond: Expr
    then: Branch
    else_: Branch
    span: Span = _span()


@dataclass
class Sequence:
    first: list["Statement"]
    second: Branch
    span: Span = _span()


Statement = Union[Bind, Alias, ProcessCall, ChannelPut, AnonReturn, Become, LocalDecl, IfThenElse, Sequence]


# ------------------------------------------------------------- declarations


@dataclass
class Param:
    name: str
    default: Expr | None = None
    span: Span = _span()

    @property
    def is_handle(self) -> bool:
        return is_handle_name(self.name)


@dataclass
class Header:
    name: str
    inputs: list[Param]
    curried: list[Param] = field(default_factory=list)
    outputs: list[Param] = field(default_factory=list)
    anon: str | None = None  # '<' anonymous value, '~' anonymous handle
    span: Span = _span()


@dataclass
class Rule:
    lhs: list[LhsItem]
    bars: int
    rhs: list[Statement]
    body: list[list["Rule"]] | None = None
    span: Span = _span()
    # filled in by lowering passes
    target: str | None = None  # implicit recursion target when not the own procedure
    target_header: Header | None = field(default=None, compare=False, repr=False)
    # channel-sugar continuation values: variable -> name fed to the recursion
    versions: dict = field(default_factory=dict, compare=False, repr=False)


@dataclass
class ProcDecl:
    header: Header
    init: list[Statement] | None = None
    macro: list[Statement] | None = None
    groups: list[list[Rule]] = field(default_factory=list)
    span: Span = _span()


@dataclass
class SurfaceProgram:
    declarations: list[ProcDecl] = field(default_factory=list)

    def proc(self, name: str) -> ProcDecl:
        for d in self.declarations:
            if d.header.name == name:
                return d
        raise KeyError(name)
