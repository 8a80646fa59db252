"""Single-bar rules get their continuation call written out."""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from .common import Fresh, rename_reads, rename_writes, stmt_reads, stmt_writes


def _recursion(r: A.Rule, inputs: set[str], outputs: set[str], fresh: Fresh) -> A.Rule:
    h = r.target_header
    rhs = list(r.rhs)
    version: dict[str, str] = {k: v for k, v in r.versions.items() if k in inputs and v}

    # rebinding an input feeds the new value to the continuation
    kept = []
    for st in rhs:
        if isinstance(st, A.Alias) and st.name in inputs and isinstance(st.expr, A.Var):
            version[st.name] = st.expr.name
            continue
        hit = [w for w in stmt_writes(st) if w in inputs]
        if hit:
            mapping = {w: fresh(w) for w in hit}
            st = rename_writes(st, mapping)
            version.update(mapping)
        kept.append(st)
    rhs = kept

    closed = {i.name for i in r.lhs if isinstance(i, A.Close)}
    args = [A.Var(version.get(p.name, p.name)) for p in h.inputs]
    outs: list[str] = []
    fresh_outs: list[str] = []
    for p in h.outputs:
        o = p.name
        cur = r.versions.get(o, o) if o in r.versions else o
        written = {w for st in rhs for w in stmt_writes(st)}
        if cur is None or (o in closed and o in outputs):
            v = fresh(o)
            fresh_outs.append(v)
        elif cur in written:
            v = fresh(o)
            rhs = [rename_reads(st, {cur: v}) for st in rhs]
            fresh_outs.append(v)
        else:
            v = cur
        outs.append(v)

    read = {x for st in rhs for x in stmt_reads(st)}
    if h.outputs:
        drop = all(o in fresh_outs and o not in read for o in outs)
    else:
        drop = any(c in inputs and c not in version for c in closed)
    if not drop:
        rhs.append(A.ProcessCall(A.Call(h.name, args), outs, r.span))
    return replace(r, rhs=rhs, bars=2, target=None, target_header=None)


def expand_implicit_recursion(decl: A.ProcDecl, fresh: Fresh | None = None) -> A.ProcDecl:
    fresh = fresh or Fresh.above(decl)
    h = decl.header
    inputs = {p.name for p in h.inputs}
    outputs = {p.name for p in h.outputs}
    groups = []
    for g in decl.groups:
        ng = []
        for r in g:
            if r.bars == 1:
                if r.target_header is None:
                    r = replace(r, target=h.name, target_header=h)
                r = _recursion(r, inputs, outputs, fresh)
            ng.append(r)
        groups.append(ng)
    return replace(decl, groups=groups)
