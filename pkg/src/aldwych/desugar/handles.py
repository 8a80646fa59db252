"""Convert handles to streams and emit the core program.

For every handle in a rule there is one *owner* (the position that creates
the object and so reads its message stream) and any number of *clients*
(positions that may send to it).  After conversion the owner position holds
a stream variable that is bound to the messages sent directly in the rule,
followed by the merge of one stream per client.

Which side of the rule a position sits on decides whether it is fixed by
the context or local to the rule:

* header output handle: clients outside (the parameter, or what is left of
  it after the lhs took a message);
* header input handle: owner outside (the parameter, written here);
* handle argument of a received message: owner outside (reply slot);
* handle result of a received message: clients outside (captured stream);
* handle result of a sent message: owner outside (slot written here);
* call inputs, aliased values and handle arguments of sent messages are
  clients; call outputs and alias targets are owners.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import ast as A
from ..core import NIL, CConst, CNum, CoreCall, CoreProc, CoreProgram, CoreRule, CTuple, CVar, cons
from ..errors import DesugarError
from .common import Fresh, expr_vars

MERGE = "merge"


def is_handle(name: str) -> bool:
    return A.is_handle_name(name)


def split_params(names: list[str]) -> tuple[list[str], list[str]]:
    fut = [n for n in names if not is_handle(n)]
    hnd = [n for n in names if is_handle(n)]
    return fut, hnd


@dataclass
class _Handle:
    owner: str | None = None  # fixed owner stream name (context side)
    owner_pos: object = None  # rhs owner position key
    clients: list = field(default_factory=list)  # ("fixed", name) | ("pos", key)
    sends: list = field(default_factory=list)  # core terms, in order


class _RuleConverter:
    def __init__(self, proc: "_ProcConverter", rule: A.Rule):
        self.p = proc
        self.rule = rule
        self.fresh = proc.fresh
        self.handles: dict[str, _Handle] = {}
        self.names: dict[object, str] = {}  # position key -> stream variable

    def h(self, name: str) -> _Handle:
        return self.handles.setdefault(name, _Handle())

    def stream_base(self, name: str) -> str:
        return name.split("%")[0].lower() or "s"

    # ------------------------------------------------------------ positions
    def set_owner_fixed(self, x: str, var: str):
        hd = self.h(x)
        if hd.owner is not None or hd.owner_pos is not None:
            raise DesugarError("MultipleWriters", f"handle {x} has two owners", self.rule.span)
        hd.owner = var

    def set_owner_pos(self, x: str, key):
        hd = self.h(x)
        if hd.owner is not None or hd.owner_pos is not None:
            raise DesugarError("MultipleWriters", f"handle {x} has two owners", self.rule.span)
        hd.owner_pos = key

    def scan(self):
        head = self.p.header
        consumed: dict[str, str] = {}
        closed: set[str] = set()
        self.lhs_matches: list[tuple[str, object]] = []
        for i, item in enumerate(self.rule.lhs):
            if isinstance(item, A.ChannelGet) and is_handle(item.name):
                consumed[item.name] = self.fresh(self.p.param(item.name))
            elif isinstance(item, A.Close) and is_handle(item.name):
                closed.add(item.name)
        for x in head.outputs:
            if not is_handle(x.name) or x.name in closed:
                continue
            self.h(x.name).clients.append(("fixed", consumed.get(x.name, self.p.param(x.name))))
        for x in head.inputs:
            if is_handle(x.name):
                self.set_owner_fixed(x.name, self.p.param(x.name))
        self.consumed = consumed
        # message patterns on the lhs
        self.received: dict[tuple, str] = {}
        for i, item in enumerate(self.rule.lhs):
            if isinstance(item, A.ChannelGet) and is_handle(item.name):
                for j, (op, pat) in enumerate(item.items):
                    if isinstance(pat, A.Msg):
                        for k, a in enumerate(pat.args):
                            if isinstance(a, A.Var) and is_handle(a.name):
                                v = self.fresh(self.stream_base(a.name))
                                self.received[(i, j, "a", k)] = v
                                self.set_owner_fixed(a.name, v)
                        for k, o in enumerate(pat.outs):
                            if is_handle(o):
                                v = self.fresh(self.stream_base(o))
                                self.received[(i, j, "o", k)] = v
                                self.h(o).clients.append(("fixed", v))
        # rhs positions
        for s, st in enumerate(self.rule.rhs):
            if isinstance(st, A.ProcessCall):
                call = st.expr
                for k, a in enumerate(call.args):
                    if isinstance(a, A.Var) and is_handle(a.name):
                        self.h(a.name).clients.append(("pos", (s, "in", k)))
                for k, o in enumerate(st.outs):
                    if is_handle(o):
                        self.set_owner_pos(o, (s, "out", k))
            elif isinstance(st, A.Alias) and is_handle(st.name):
                self.set_owner_pos(st.name, (s, "alias-to"))
                self.h(st.expr.name).clients.append(("pos", (s, "alias-from")))
            elif isinstance(st, A.ChannelPut) and is_handle(st.name):
                self.h(st.name)
                for j, (op, it) in enumerate(st.items):
                    if isinstance(it, A.Msg):
                        for k, a in enumerate(it.args):
                            if isinstance(a, A.Var) and is_handle(a.name):
                                self.h(a.name).clients.append(("pos", (s, j, "a", k)))
                        for k, o in enumerate(it.outs):
                            if is_handle(o):
                                self.set_owner_pos(o, (s, j, "o", k))

    def decide(self):
        """Name every position and produce the connecting binds and merges."""
        self.links: list = []  # ("bind", var, term) | ("merge", a, b, out)
        self.sent: dict[str, list] = {}
        for x, hd in self.handles.items():
            if hd.owner is None and hd.owner_pos is None:
                if not hd.clients and not hd.sends:
                    continue
                raise DesugarError("UnwrittenFuture", f"handle {x} has no owner", self.rule.span)
            owner = hd.owner
            pos_clients = [c for kind, c in hd.clients if kind == "pos"]
            if owner is None:
                if not hd.sends and len(hd.clients) == 1 and hd.clients[0][0] == "fixed":
                    owner = hd.clients[0][1]
                    self.names[hd.owner_pos] = owner
                    continue
                owner = self.fresh(self.stream_base(x))
                self.names[hd.owner_pos] = owner
            hd.owner = owner
            if not hd.sends and len(hd.clients) == 1:
                kind, c = hd.clients[0]
                if kind == "pos":
                    self.names[c] = owner
                else:
                    self.links.append(("bind", owner, CVar(c)))
                continue
            for c in pos_clients:
                self.names[c] = self.fresh(self.stream_base(x))
            streams = [c if kind == "fixed" else self.names[c] for kind, c in hd.clients]
            target = owner if not hd.sends else None
            if not streams:
                tail = NIL
                if target is not None:
                    self.links.append(("bind", owner, NIL))
                    continue
            elif len(streams) == 1:
                tail = CVar(streams[0])
            else:
                acc = streams[0]
                for k, s in enumerate(streams[1:]):
                    last = k == len(streams) - 2
                    out = target if (last and target is not None) else self.fresh(self.stream_base(x))
                    self.links.append(("merge", acc, s, out))
                    acc = out
                if target is not None:
                    continue
                tail = CVar(acc)
            self.sent[x] = [owner, tail]

    # ---------------------------------------------------------------- terms
    def term(self, e) -> object:
        if isinstance(e, A.Var):
            if is_handle(e.name):
                raise DesugarError("HandleInFutureTuple", f"handle {e.name} inside a future term", self.rule.span)
            return CVar(e.name)
        if isinstance(e, A.Const):
            return CConst(e.name)
        if isinstance(e, A.Num):
            return CNum(e.value)
        if isinstance(e, A.Tup):
            return CTuple(e.tag, tuple(self.term(a) for a in e.args))
        raise DesugarError("UnsupportedExpression", f"{type(e).__name__} left after lowering", self.rule.span)

    def message(self, m: A.Msg, slot, receiving: bool) -> CTuple:
        """Tuple layout: future inputs, handle results, handle arguments,
        future results.  Slots the receiver writes are reply variables."""
        fut_in = [self.term(a) for a in m.args if not (isinstance(a, A.Var) and is_handle(a.name))]
        h_in = [(k, a.name) for k, a in enumerate(m.args) if isinstance(a, A.Var) and is_handle(a.name)]
        h_out = [(k, o) for k, o in enumerate(m.outs) if is_handle(o)]
        f_out = [o for o in m.outs if not is_handle(o)]
        args = list(fut_in)
        for k, o in h_out:
            args.append(CVar(slot("o", k)))
        for k, a in h_in:
            args.append(CVar(slot("a", k), reply=True))
        for o in f_out:
            args.append(CVar(o, reply=True))
        return CTuple(m.name, tuple(args))

    # ----------------------------------------------------------------- emit
    def convert(self) -> CoreRule:
        self.scan()
        # direct sends are needed before deciding the stream shapes
        for s, st in enumerate(self.rule.rhs):
            if isinstance(st, A.ChannelPut) and is_handle(st.name):
                hd = self.h(st.name)
                for j, (op, it) in enumerate(st.items):
                    hd.sends.append((s, j, op, it))
        self.decide()
        core = CoreRule()
        for i, item in enumerate(self.rule.lhs):
            if isinstance(item, A.Match):
                core.matches.append((item.var, self.term(item.pattern)))
            elif isinstance(item, A.ChannelGet) and is_handle(item.name):
                pats = []
                for j, (op, pat) in enumerate(item.items):
                    if op == "?":
                        pats.append(CVar(pat.name))
                    elif isinstance(pat, A.Msg):
                        pats.append(self.message(pat, lambda kind, k, i=i, j=j: self.received[(i, j, kind, k)], True))
                    else:
                        pats.append(self.term(pat))
                var = self.p.param(item.name)
                tail = CVar(self.consumed[item.name])
                if item.lookahead is None:
                    chain = tail
                    for t in reversed(pats):
                        chain = cons(t, chain)
                    core.matches.append((var, chain))
                else:
                    mid = self.consumed[item.name]
                    first = CVar(mid)
                    for t in reversed(pats[: item.lookahead]):
                        first = cons(t, first)
                    rest = CVar(self.fresh(mid))
                    for t in reversed(pats[item.lookahead :]):
                        rest = cons(t, rest)
                    core.matches.append((var, first))
                    core.matches.append((mid, rest))
            elif isinstance(item, A.Close):
                core.matches.append((self.p.param(item.name), NIL))
            elif isinstance(item, A.Guard):
                core.guards.append((item.op, self.term(item.left), self.term(item.right)))
        for s, st in enumerate(self.rule.rhs):
            if isinstance(st, A.Bind):
                core.binds.append((st.name, self.term(st.term)))
            elif isinstance(st, A.Alias):
                if not is_handle(st.name):
                    core.binds.append((st.name, self.term(st.expr)))
                else:
                    src = self.names[(s, "alias-from")]
                    dst = self.names[(s, "alias-to")]
                    if src != dst:
                        core.binds.append((src, CVar(dst)))
            elif isinstance(st, A.ProcessCall):
                call = st.expr
                fut = [self.term(a) for a in call.args if not (isinstance(a, A.Var) and is_handle(a.name))]
                own = [self.stream_in(s, k, o) for k, o in enumerate(st.outs) if is_handle(o)]
                cli = [self.names[(s, "in", k)] for k, a in enumerate(call.args) if isinstance(a, A.Var) and is_handle(a.name)]
                fouts = [o for o in st.outs if not is_handle(o)]
                core.calls.append(CoreCall(call.name, tuple(fut + own), tuple(cli + fouts)))
        for x, (owner, tail) in self.sent.items():
            items = []
            for s, j, op, it in self.handles[x].sends:
                if isinstance(it, A.Msg):
                    items.append(self.message(it, lambda kind, k, s=s, j=j: self.names[(s, j, kind, k)], False))
                else:
                    items.append(CVar(it.name))
            chain = tail
            for t in reversed(items):
                chain = cons(t, chain)
            core.binds.append((owner, chain))
        for link in self.links:
            if link[0] == "bind":
                core.binds.append((link[1], link[2]))
            else:
                _, a, b, out = link
                core.calls.append(CoreCall(MERGE, (CVar(a), CVar(b)), (out,)))
        return core

    def stream_in(self, s, k, o):
        name = self.names.get((s, "out", k))
        if name is None:
            return NIL
        return CVar(name)


class _ProcConverter:
    def __init__(self, decl: A.ProcDecl, fresh: Fresh):
        self.decl = decl
        self.header = decl.header
        self.fresh = fresh
        used = {n for g in decl.groups for r in g for n in _rule_names(r)} | {p.name for p in decl.header.inputs + decl.header.outputs}
        self.params: dict[str, str] = {}
        for p in decl.header.inputs + decl.header.outputs:
            if is_handle(p.name):
                low = p.name.lower()
                if low in used or low in self.params.values() or "%" in low:
                    low = fresh(low)
                self.params[p.name] = low

    def param(self, name: str) -> str:
        return self.params.get(name, name)

    def convert(self) -> CoreProc:
        h = self.header
        f_in, h_out = split_params([p.name for p in h.inputs])[0], split_params([p.name for p in h.outputs])[1]
        h_in, f_out = split_params([p.name for p in h.inputs])[1], split_params([p.name for p in h.outputs])[0]
        ins = f_in + [self.param(x) for x in h_out]
        outs = [self.param(x) for x in h_in] + f_out
        groups = [[_RuleConverter(self, r).convert() for r in g] for g in self.decl.groups]
        return CoreProc(h.name, ins, outs, groups)


def _rule_names(r: A.Rule):
    for item in r.lhs:
        if isinstance(item, A.Match):
            yield item.var
            yield from expr_vars(item.pattern)
    for st in r.rhs:
        if isinstance(st, (A.Bind, A.Alias)):
            yield st.name
        if isinstance(st, A.ProcessCall):
            yield from st.outs
            yield from expr_vars(st.expr)


def convert_handles_to_streams(decls: list[A.ProcDecl], fresh: Fresh | None = None, entry: str | None = None) -> CoreProgram:
    fresh = fresh or Fresh.above(decls)
    procs = [_ProcConverter(d, fresh).convert() for d in decls]
    if entry is None and any(p.name == "main" for p in procs):
        entry = "main"
    return CoreProgram(procs, entry)
