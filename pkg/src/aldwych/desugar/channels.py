"""Stream notation on futures: ``x.T``, ``x?v``, ``x/..``, ``x$``, ``x^e``.

Gets on the left become cons matches with a fresh tail; puts on the right
bind the channel to a cons with a fresh tail.  In both cases the tail is
recorded in ``versions`` so that the continuation (implicit recursion or
the call of a lifted block) receives it.
"""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from ..errors import DesugarError
from .common import Fresh, rename_all, rename_reads

END = A.Const("$")


def _cons(head, tail):
    return A.Tup(":", [head, tail])


def _chain(items, tail):
    for it in reversed(items):
        tail = _cons(it, tail)
    return tail


class _Channels:
    def __init__(self, fresh: Fresh):
        self.fresh = fresh

    def groups(self, groups):
        return [[self.rule(r) for r in g] for g in groups]

    def rule(self, r: A.Rule) -> A.Rule:
        consts = {x.var for x in r.lhs if isinstance(x, A.Match) and isinstance(x.pattern, (A.Const, A.Num))}
        lhs = []
        versions = dict(r.versions)
        for item in r.lhs:
            if isinstance(item, A.ChannelGet) and item.name and not A.is_handle_name(item.name):
                if item.name in consts:
                    raise DesugarError("SugarOnNonFuture", f"{item.name} is a constant, not a channel", item.span)
                lhs.extend(self.get(item, versions))
            elif isinstance(item, A.Close) and not A.is_handle_name(item.name):
                if item.name in consts:
                    raise DesugarError("SugarOnNonFuture", f"{item.name} is a constant, not a channel", item.span)
                lhs.append(A.Match(item.name, END, item.span))
            else:
                lhs.append(item)
        consumed = {k: v for k, v in versions.items() if k not in r.versions and v}
        rhs = [rename_reads(st, consumed) for st in r.rhs]
        rhs, versions = self.stmts(rhs, versions)
        body = self.groups(r.body) if r.body else r.body
        return replace(r, lhs=lhs, rhs=rhs, body=body, versions=versions)

    def get(self, item: A.ChannelGet, versions: dict) -> list:
        x = item.name
        pats = [p for _, p in item.items]
        k = len(pats) if item.lookahead is None else item.lookahead
        tail = self.fresh(x)
        if k == len(pats):
            versions[x] = tail
            return [A.Match(x, _chain(pats, A.Var(tail)), item.span)]
        if k == 0:
            return [A.Match(x, _chain(pats, A.Var(tail)), item.span)]
        mid = self.fresh(x)
        versions[x] = mid
        return [
            A.Match(x, _chain(pats[:k], A.Var(mid)), item.span),
            A.Match(mid, _chain(pats[k:], A.Var(tail)), item.span),
        ]

    def stmts(self, stmts, versions: dict):
        """Lower puts; returns new statements and the updated versions."""
        versions = dict(versions)
        flat = []
        for st in stmts:
            if isinstance(st, A.Sequence) and st.first:
                flat.extend(st.first)
                st = replace(st, first=[])
            flat.append(st)
        stmts = flat
        puts: dict[str, list[A.ChannelPut]] = {}
        for st in stmts:
            if isinstance(st, A.ChannelPut) and not A.is_handle_name(st.name):
                puts.setdefault(st.name, []).append(st)
        out = []
        done: set[str] = set()
        rename: dict[str, str] = {}
        binds = {}
        for x, group in puts.items():
            cur = versions.get(x, x)
            seq = []
            closed = False
            for st in group:
                if closed:
                    raise DesugarError("PutAfterClose", f"{x} is already closed", st.span)
                for _, it in st.items:
                    if isinstance(it, A.Msg):
                        raise DesugarError("SugarOnNonFuture", f"message send to future {x}", st.span)
                    seq.append(it)
                closed = closed or st.close
            if closed:
                nxt = None
                term = _chain(seq, END)
            else:
                nxt = self.fresh(x)
                term = _chain(seq, A.Var(nxt))
            binds[x] = A.Bind(cur, term, group[0].span)
            if nxt is not None:
                rename[cur] = nxt
                versions[x] = nxt
            else:
                versions.pop(x, None)
                versions[x] = None
        for st in stmts:
            if isinstance(st, A.ChannelPut) and st.name in puts:
                if st.name not in done:
                    done.add(st.name)
                    out.append(binds[st.name])
                continue
            if isinstance(st, A.IfThenElse):
                st = replace(st, then=self.branch(st.then), else_=self.branch(st.else_))
            elif isinstance(st, A.Sequence):
                st = replace(st, second=self.branch(st.second))
            out.append(rename_all(st, rename) if rename else st)
        return out, versions

    def branch(self, b: A.Branch) -> A.Branch:
        stmts, versions = self.stmts(b.stmts, b.versions)
        return replace(b, stmts=stmts, body=self.groups(b.body) if b.body else b.body, versions=versions)


def expand_channel_sugar(decl: A.ProcDecl, fresh: Fresh | None = None) -> A.ProcDecl:
    fresh = fresh or Fresh.above(decl)
    tr = _Channels(fresh)
    return replace(decl, groups=tr.groups(decl.groups))
