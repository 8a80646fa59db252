"""Context resolution of bare names in value position.

A bare lowercase name on the right of ``=``, ``|>=`` or ``=>`` parses as a
constant.  When the same name is a parameter, a capture of the enclosing
left hand sides, or a variable written in the rule, it denotes that future
instead.
"""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from .common import lhs_bound, stmt_writes


def _fix(e, scope: set):
    if isinstance(e, A.Const) and e.name != "$" and e.name in scope:
        return A.Var(e.name, e.span)
    if isinstance(e, A.Tup) and e.tag == ":" and len(e.args) == 2:
        return replace(e, args=[_fix(a, scope) for a in e.args])
    return e


def _stmt(st, scope: set):
    if isinstance(st, A.AnonReturn):
        return replace(st, value=_fix(st.value, scope))
    if isinstance(st, A.Become):
        return replace(st, value=_fix(st.value, scope))
    if isinstance(st, A.Alias):
        return replace(st, expr=_fix(st.expr, scope))
    if isinstance(st, A.Bind):
        return replace(st, term=_fix(st.term, scope))
    if isinstance(st, A.Branch):
        return _branch(st, scope)
    if isinstance(st, A.IfThenElse):
        return replace(st, then=_branch(st.then, scope), else_=_branch(st.else_, scope))
    if isinstance(st, A.Sequence):
        return replace(st, first=_stmts(st.first, scope), second=_branch(st.second, scope))
    return st


def _written(stmts) -> set:
    out: set = set()
    for st in stmts:
        try:
            out.update(stmt_writes(st))
        except Exception:
            pass
        if isinstance(st, A.LocalDecl):
            out.update(st.names)
    return out


def _stmts(stmts, scope: set):
    scope = scope | _written(stmts)
    return [_stmt(st, scope) for st in stmts]


def _branch(b: A.Branch, scope: set) -> A.Branch:
    inner = scope | _written(b.stmts)
    return replace(b, stmts=_stmts(b.stmts, scope), body=_groups(b.body, inner) if b.body else b.body)


def _groups(groups, scope: set):
    out = []
    for g in groups:
        rules = []
        for r in g:
            s = set(scope)
            for item in r.lhs:
                s.update(lhs_bound(item))
            s |= _written(r.rhs)
            rules.append(replace(r, rhs=[_stmt(st, s) for st in r.rhs], body=_groups(r.body, s) if r.body else r.body))
        out.append(rules)
    return out


def resolve_scoped_names(d: A.ProcDecl) -> A.ProcDecl:
    h = d.header
    scope = {p.name for p in h.inputs + h.curried + h.outputs}
    return replace(
        d,
        init=_stmts(d.init, scope) if d.init else d.init,
        macro=_stmts(d.macro, scope) if d.macro else d.macro,
        groups=_groups(d.groups, scope),
    )
