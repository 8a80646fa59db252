"""Helpers shared by the lowering passes: fresh names and variable analysis."""

from __future__ import annotations

import copy
import re
from dataclasses import replace
from typing import Callable, Iterator

from .. import ast as A

_SUFFIX = re.compile(r"%(\d+)")

BUILTIN_ARITH = {"+": "add", "-": "sub", "*": "mul", "/": "div"}
BUILTIN_REL = {">": "gt", "<": "lt", ">=": "ge", "=<": "le", "<=": "le", "==": "eq", "!=": "ne"}
BUILTINS = {"merge": (2, 1)} | {n: (2, 1) for n in BUILTIN_ARITH.values()} | {n: (2, 1) for n in BUILTIN_REL.values()}


class Fresh:
    """Generates ``base%N`` names; ``%`` cannot occur in surface identifiers."""

    def __init__(self, start: int = 1):
        self.n = start

    @classmethod
    def above(cls, obj) -> "Fresh":
        found = [int(m) for m in _SUFFIX.findall(repr(obj))]
        return cls(max(found, default=0) + 1)

    def __call__(self, base: str) -> str:
        base = base.split("%")[0] or "v"
        name = f"{base}%{self.n}"
        self.n += 1
        return name


def deep(obj):
    return copy.deepcopy(obj)


# ------------------------------------------------------------- expressions


def expr_vars(e) -> Iterator[str]:
    if isinstance(e, A.Var):
        yield e.name
    elif isinstance(e, (A.Tup, A.Call)):
        for a in e.args:
            yield from expr_vars(a)
    elif isinstance(e, A.Msg):
        for a in e.args:
            yield from expr_vars(a)
    elif isinstance(e, A.NamedArg):
        yield from expr_vars(e.value)
    elif isinstance(e, (A.BinOp,)):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
    elif isinstance(e, A.Juxt):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)
    elif isinstance(e, (A.DotSend, A.TildeChain)):
        yield from expr_vars(e.target)
        for m in e.msgs:
            yield from expr_vars(m)


def map_expr(e, fn: Callable[[A.Var], A.Expr]):
    """Rebuild *e* replacing every variable through *fn*."""
    if isinstance(e, A.Var):
        return fn(e)
    if isinstance(e, A.Tup):
        return replace(e, args=[map_expr(a, fn) for a in e.args])
    if isinstance(e, A.Call):
        return replace(e, args=[map_expr(a, fn) for a in e.args])
    if isinstance(e, A.Msg):
        return replace(e, args=[map_expr(a, fn) for a in e.args])
    if isinstance(e, A.NamedArg):
        return replace(e, value=map_expr(e.value, fn))
    if isinstance(e, A.BinOp):
        return replace(e, left=map_expr(e.left, fn), right=map_expr(e.right, fn))
    if isinstance(e, A.Juxt):
        return replace(e, left=map_expr(e.left, fn), right=map_expr(e.right, fn))
    if isinstance(e, (A.DotSend, A.TildeChain)):
        return replace(e, target=map_expr(e.target, fn), msgs=[map_expr(m, fn) for m in e.msgs])
    return e


def rename_expr(e, mapping: dict[str, str]):
    return map_expr(e, lambda v: replace(v, name=mapping.get(v.name, v.name)))


# -------------------------------------------------------------- statements


def stmt_writes(st) -> list[str]:
    """Names written by a flat statement (ITE/Sequence contribute nothing)."""
    if isinstance(st, (A.Bind, A.Alias)):
        return [st.name]
    if isinstance(st, A.ProcessCall):
        out = list(st.outs)
        if isinstance(st.expr, A.DotSend):
            for m in st.expr.msgs:
                out.extend(m.outs)
        return out
    if isinstance(st, A.ChannelPut):
        out = [] if A.is_handle_name(st.name) else [st.name]
        for _, it in st.items:
            if isinstance(it, A.Msg):
                out.extend(it.outs)
        return out
    return []


def stmt_reads(st) -> list[str]:
    if isinstance(st, A.Bind):
        return list(expr_vars(st.term))
    if isinstance(st, A.Alias):
        return list(expr_vars(st.expr))
    if isinstance(st, A.ProcessCall):
        return list(expr_vars(st.expr))
    if isinstance(st, A.ChannelPut):
        out = [st.name] if A.is_handle_name(st.name) else []
        for _, it in st.items:
            out.extend(expr_vars(it))
        return out
    if isinstance(st, (A.AnonReturn, A.Become)):
        return list(expr_vars(st.value))
    if isinstance(st, A.IfThenElse):
        return list(expr_vars(st.cond))
    return []


def rename_reads(st, mapping: dict[str, str]):
    if not mapping:
        return st
    if isinstance(st, A.Bind):
        return replace(st, term=rename_expr(st.term, mapping))
    if isinstance(st, A.Alias):
        return replace(st, expr=rename_expr(st.expr, mapping))
    if isinstance(st, A.ProcessCall):
        return replace(st, expr=rename_expr(st.expr, mapping))
    if isinstance(st, A.ChannelPut):
        name = mapping.get(st.name, st.name) if A.is_handle_name(st.name) else st.name
        return replace(st, name=name, items=[(op, rename_expr(it, mapping)) for op, it in st.items])
    if isinstance(st, (A.AnonReturn, A.Become)):
        return replace(st, value=rename_expr(st.value, mapping))
    if isinstance(st, A.IfThenElse):
        return replace(st, cond=rename_expr(st.cond, mapping))
    return st


def rename_writes(st, mapping: dict[str, str]):
    if not mapping:
        return st
    m = lambda n: mapping.get(n, n)  # noqa: E731
    if isinstance(st, (A.Bind, A.Alias)):
        return replace(st, name=m(st.name))
    if isinstance(st, A.ProcessCall):
        expr = st.expr
        if isinstance(expr, A.DotSend):
            expr = replace(expr, msgs=[replace(x, outs=[m(o) for o in x.outs]) for x in expr.msgs])
        return replace(st, expr=expr, outs=[m(o) for o in st.outs])
    if isinstance(st, A.ChannelPut):
        name = st.name if A.is_handle_name(st.name) else m(st.name)
        items = [(op, replace(it, outs=[m(o) for o in it.outs]) if isinstance(it, A.Msg) else it) for op, it in st.items]
        return replace(st, name=name, items=items)
    return st


def rename_all(st, mapping: dict[str, str]):
    return rename_writes(rename_reads(st, mapping), mapping)


# --------------------------------------------------------------- lhs items


def lhs_bound(item) -> list[str]:
    """Capture variables introduced by a left hand side item."""
    if isinstance(item, A.Match):
        return list(expr_vars(item.pattern))
    if isinstance(item, A.ChannelGet):
        out = []
        for _, p in item.items:
            out.extend(expr_vars(p))
            if isinstance(p, A.Msg):
                out.extend(p.outs)
        return out
    return []


def lhs_reads(item) -> list[str]:
    if isinstance(item, A.Match):
        return [item.var]
    if isinstance(item, (A.ChannelGet, A.Close)):
        return [item.name] if item.name else []
    if isinstance(item, A.Guard):
        return list(expr_vars(item.left)) + list(expr_vars(item.right))
    return []


def msg_reply_outs(item) -> list[str]:
    """Output (reply) names of messages received by an lhs item."""
    if isinstance(item, A.ChannelGet):
        return [o for _, p in item.items if isinstance(p, A.Msg) for o in p.outs]
    return []


# ------------------------------------------------------------- traversal


def iter_rules(groups) -> Iterator[A.Rule]:
    for g in groups:
        for r in g:
            yield r
            if r.body:
                yield from iter_rules(r.body)
            for st in r.rhs:
                yield from _stmt_rules(st)


def _stmt_rules(st) -> Iterator[A.Rule]:
    if isinstance(st, A.IfThenElse):
        for b in (st.then, st.else_):
            yield from _branch_rules(b)
    elif isinstance(st, A.Sequence):
        yield from _branch_rules(st.second)


def _branch_rules(b: A.Branch) -> Iterator[A.Rule]:
    for st in b.stmts:
        yield from _stmt_rules(st)
    if b.body:
        yield from iter_rules(b.body)


def header_inputs(h: A.Header) -> list[str]:
    return [p.name for p in h.inputs] + [p.name for p in h.curried]


def header_outputs(h: A.Header) -> list[str]:
    return [p.name for p in h.outputs]


def map_statements(stmts: list, fn) -> list:
    """Apply *fn* (stmt -> list[stmt]) to statements, descending into branches."""
    out = []
    for st in stmts:
        if isinstance(st, A.IfThenElse):
            st = replace(st, then=map_branch(st.then, fn), else_=map_branch(st.else_, fn))
        elif isinstance(st, A.Sequence):
            st = replace(st, first=map_statements(st.first, fn), second=map_branch(st.second, fn))
        out.extend(fn(st))
    return out


def map_branch(b: A.Branch, fn) -> A.Branch:
    return replace(b, stmts=map_statements(b.stmts, fn))


class Signatures:
    """Known procedure interfaces: input/output names (and so kinds) by name."""

    def __init__(self, program: A.SurfaceProgram | None = None):
        self.procs: dict[str, A.Header] = {}
        if program is not None:
            for d in program.declarations:
                self.procs[d.header.name] = d.header

    def output_kind(self, name: str) -> str:
        h = self.procs.get(name)
        if h is None:
            return "future"
        if h.anon == "~":
            return "handle"
        if h.anon == "<":
            return "future"
        if h.outputs:
            return "handle" if h.outputs[0].is_handle else "future"
        return "future"

    def input_kind(self, name: str, index: int) -> str | None:
        h = self.procs.get(name)
        if h is None:
            return None
        ps = h.inputs + h.curried
        if index < len(ps):
            return "handle" if ps[index].is_handle else "future"
        return None


def walk_expr(e, fn):
    """Post-order rebuild of an expression tree, applying *fn* to every node."""
    if isinstance(e, (A.Tup, A.Call)):
        e = replace(e, args=[walk_expr(a, fn) for a in e.args])
    elif isinstance(e, A.Msg):
        e = replace(e, args=[walk_expr(a, fn) for a in e.args])
    elif isinstance(e, A.NamedArg):
        e = replace(e, value=walk_expr(e.value, fn))
    elif isinstance(e, (A.BinOp, A.Juxt)):
        e = replace(e, left=walk_expr(e.left, fn), right=walk_expr(e.right, fn))
    elif isinstance(e, (A.DotSend, A.TildeChain)):
        e = replace(e, target=walk_expr(e.target, fn), msgs=[walk_expr(m, fn) for m in e.msgs])
    return fn(e)


def walk_stmt_exprs(st, fn):
    """Apply :func:`walk_expr` to every expression inside a statement."""
    w = lambda x: walk_expr(x, fn)  # noqa: E731
    if isinstance(st, A.Bind):
        return replace(st, term=w(st.term))
    if isinstance(st, A.Alias):
        return replace(st, expr=w(st.expr))
    if isinstance(st, A.ProcessCall):
        return replace(st, expr=w(st.expr))
    if isinstance(st, A.ChannelPut):
        return replace(st, items=[(op, w(it)) for op, it in st.items])
    if isinstance(st, (A.AnonReturn, A.Become)):
        return replace(st, value=w(st.value))
    if isinstance(st, A.IfThenElse):
        return replace(st, cond=w(st.cond), then=_walk_branch(st.then, fn), else_=_walk_branch(st.else_, fn))
    if isinstance(st, A.Sequence):
        return replace(st, first=[walk_stmt_exprs(s, fn) for s in st.first], second=_walk_branch(st.second, fn))
    return st


def _walk_branch(b: A.Branch, fn) -> A.Branch:
    return replace(
        b,
        stmts=[walk_stmt_exprs(s, fn) for s in b.stmts],
        body=walk_groups_exprs(b.body, fn) if b.body else b.body,
    )


def walk_groups_exprs(groups, fn):
    out = []
    for g in groups:
        ng = []
        for r in g:
            ng.append(
                replace(
                    r,
                    lhs=[_walk_lhs(i, fn) for i in r.lhs],
                    rhs=[walk_stmt_exprs(s, fn) for s in r.rhs],
                    body=walk_groups_exprs(r.body, fn) if r.body else r.body,
                )
            )
        out.append(ng)
    return out


def _walk_lhs(item, fn):
    if isinstance(item, A.Guard):
        return replace(item, left=walk_expr(item.left, fn), right=walk_expr(item.right, fn))
    return item


def walk_decl_exprs(d: A.ProcDecl, fn) -> A.ProcDecl:
    return replace(
        d,
        init=[walk_stmt_exprs(s, fn) for s in d.init] if d.init is not None else None,
        macro=[walk_stmt_exprs(s, fn) for s in d.macro] if d.macro is not None else None,
        groups=walk_groups_exprs(d.groups, fn),
    )
