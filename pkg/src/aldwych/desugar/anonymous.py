"""Anonymous returns, anonymous outputs and ``~``/``<`` as values."""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from ..errors import DesugarError
from .common import Fresh, Signatures, walk_expr


def _value_kind(value, sigs: Signatures) -> str:
    if isinstance(value, A.AnonSelf):
        return "handle" if value.which == "~" else "future"
    if isinstance(value, A.Var):
        return "handle" if A.is_handle_name(value.name) else "future"
    if isinstance(value, A.Call):
        return sigs.output_kind(value.name)
    return "future"


class _Anon:
    def __init__(self, decl: A.ProcDecl, sigs: Signatures, fresh: Fresh):
        self.sigs = sigs
        self.fresh = fresh
        h = decl.header
        self.self_name: str | None = None  # name standing for ``~``
        self.anon_out: str | None = None  # name standing for ``<``
        taken = {p.name for p in h.inputs + h.curried + h.outputs}
        if h.anon == "~":
            self.self_name = "Self" if "Self" not in taken else fresh("Self")
            self.anon_out = self.self_name
        elif h.anon == "<":
            self.anon_out = fresh("r")
        elif len(h.outputs) == 1:
            self.anon_out = h.outputs[0].name
            if h.outputs[0].is_handle:
                self.self_name = h.outputs[0].name

    # ---------------------------------------------------------------- header
    def header(self, h: A.Header) -> A.Header:
        if h.anon:
            return replace(h, outputs=[A.Param(self.anon_out)], anon=None)
        return h

    # ----------------------------------------------------------------- rules
    def groups(self, groups, target):
        return [[self.rule(r, target) for r in g] for g in groups]

    def rule(self, r: A.Rule, target):
        anon_msgs = [
            (i, j)
            for i, item in enumerate(r.lhs)
            if isinstance(item, A.ChannelGet)
            for j, (_, pat) in enumerate(item.items)
            if isinstance(pat, A.Msg) and pat.anon
        ]
        lhs = list(r.lhs)
        if anon_msgs:
            i, j = anon_msgs[0]
            values = self._returns(r.rhs, r.body)
            kinds = {_value_kind(v, self.sigs) for v in values}
            reply = self.fresh("Return" if kinds == {"handle"} else "return")
            item = lhs[i]
            items = list(item.items)
            op, pat = items[j]
            items[j] = (op, replace(pat, outs=pat.outs + [reply], anon=False))
            lhs[i] = replace(item, items=items)
            target = reply
        lhs = [self.lhs_item(x) for x in lhs]
        rhs = self.stmts(r.rhs, target)
        body = self.groups(r.body, target) if r.body else r.body
        return replace(r, lhs=lhs, rhs=rhs, body=body)

    def lhs_item(self, item):
        if isinstance(item, A.ChannelGet) and item.name == "~":
            return replace(item, name=self._self(item.span))
        if isinstance(item, A.Close) and item.name == "~":
            return replace(item, name=self._self(item.span))
        if isinstance(item, A.Guard):
            return replace(item, left=self.expr(item.left), right=self.expr(item.right))
        return item

    def _returns(self, stmts, body) -> list:
        """Values returned anonymously in this scope (not by nested anon rules)."""
        out = []
        for st in stmts:
            if isinstance(st, A.AnonReturn):
                out.append(st.value)
            elif isinstance(st, A.IfThenElse):
                for b in (st.then, st.else_):
                    out.extend(self._returns(b.stmts, b.body))
            elif isinstance(st, A.Sequence):
                out.extend(self._returns(st.first, None))
                out.extend(self._returns(st.second.stmts, st.second.body))
        for g in body or []:
            for r in g:
                if not any(isinstance(p, A.Msg) and p.anon for x in r.lhs if isinstance(x, A.ChannelGet) for _, p in x.items):
                    out.extend(self._returns(r.rhs, r.body))
        return out

    # ------------------------------------------------------------ statements
    def stmts(self, stmts, target):
        return [self.stmt(s, target) for s in stmts]

    def stmt(self, st, target):
        if isinstance(st, A.AnonReturn):
            dest = target or self.anon_out
            if dest is None:
                raise DesugarError("AnonymousWriteWithoutAnonymousOutput", "anonymous return with no anonymous output", st.span)
            value = self.expr(st.value)
            if st.bind:
                return A.Bind(dest, value, st.span)
            return A.Alias(dest, value, st.span)
        if isinstance(st, A.Become):
            if self.anon_out is None:
                raise DesugarError("AnonymousWriteWithoutAnonymousOutput", "<= used without an anonymous output", st.span)
            return A.Alias(self.anon_out, self.expr(st.value), st.span)
        if isinstance(st, A.Bind):
            return replace(st, term=self.expr(st.term))
        if isinstance(st, A.Alias):
            return replace(st, expr=self.expr(st.expr))
        if isinstance(st, A.ProcessCall):
            return replace(st, expr=self.expr(st.expr))
        if isinstance(st, A.ChannelPut):
            name = self._self(st.span) if st.name == "~" else st.name
            return replace(st, name=name, items=[(op, self.expr(e)) for op, e in st.items])
        if isinstance(st, A.IfThenElse):
            return replace(st, cond=self.expr(st.cond), then=self.branch(st.then, target), else_=self.branch(st.else_, target))
        if isinstance(st, A.Sequence):
            return replace(st, first=self.stmts(st.first, target), second=self.branch(st.second, target))
        return st

    def branch(self, b: A.Branch, target):
        return replace(b, stmts=self.stmts(b.stmts, target), body=self.groups(b.body, target) if b.body else b.body)

    def _self(self, span):
        if self.self_name is None:
            raise DesugarError("AnonymousWriteWithoutAnonymousOutput", "~ used without an anonymous output handle", span)
        return self.self_name

    def expr(self, e):
        def fix(node):
            if isinstance(node, A.AnonSelf):
                if node.which == "~":
                    return A.Var(self._self(node.span), node.span)
                if self.anon_out is None:
                    raise DesugarError("AnonymousWriteWithoutAnonymousOutput", "< used without an anonymous output", node.span)
                return A.Var(self.anon_out, node.span)
            return node

        return walk_expr(e, fix)


def expand_anonymous_forms(decl: A.ProcDecl, sigs: Signatures | None = None, fresh: Fresh | None = None) -> A.ProcDecl:
    sigs = sigs or Signatures(A.SurfaceProgram([decl]))
    fresh = fresh or Fresh.above(decl)
    tr = _Anon(decl, sigs, fresh)
    groups = tr.groups(decl.groups, None)
    init = tr.stmts(decl.init, None) if decl.init is not None else None
    return replace(decl, header=tr.header(decl.header), groups=groups, init=init)
