"""Mode and kind discipline over lowered (but not yet handle-converted) rules.

Kinds come from capitalisation: capitalised names are handles, the rest are
futures.  The checks return :class:`Diagnostic` lists rather than raising.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import ast as A
from .desugar.common import BUILTINS, expr_vars
from .errors import Diagnostic, Span

ERROR = "ERROR"
WARNING = "WARNING"


def kind(name: str) -> str:
    return "handle" if A.is_handle_name(name) else "future"


@dataclass
class RuleUse:
    """Reader/writer counts for one rule."""

    writers: Counter = field(default_factory=Counter)
    readers: Counter = field(default_factory=Counter)
    captures: list = field(default_factory=list)  # lhs pattern variables
    replies: list = field(default_factory=list)  # lhs back-communication slots
    relays: list = field(default_factory=list)  # ``H?m`` captures
    closed: set = field(default_factory=set)
    relay_uses: Counter = field(default_factory=Counter)  # uses as ``^`` operand


def rule_use(r: A.Rule) -> RuleUse:
    u = RuleUse()
    for item in r.lhs:
        if isinstance(item, A.Match):
            u.readers[item.var] += 1
            u.captures.extend(v for v in expr_vars(item.pattern) if v not in u.captures)
        elif isinstance(item, A.ChannelGet):
            u.readers[item.name] += 1
            for i, (op, p) in enumerate(item.items):
                ahead = item.lookahead is not None and i >= item.lookahead
                if op == "?":
                    u.relays.append(p.name)
                elif isinstance(p, A.Msg):
                    u.captures.extend(expr_vars(p))
                    # outputs seen only by lookahead act as extra inputs
                    (u.captures if ahead else u.replies).extend(p.outs)
                else:
                    u.captures.extend(expr_vars(p))
        elif isinstance(item, A.Close):
            u.closed.add(item.name)
        elif isinstance(item, A.Guard):
            for v in list(expr_vars(item.left)) + list(expr_vars(item.right)):
                u.readers[v] += 1
    for st in r.rhs:
        if isinstance(st, A.Bind):
            u.writers[st.name] += 1
            for v in expr_vars(st.term):
                u.readers[v] += 1
        elif isinstance(st, A.Alias):
            u.writers[st.name] += 1
            for v in expr_vars(st.expr):
                u.readers[v] += 1
        elif isinstance(st, A.ProcessCall):
            for v in expr_vars(st.expr):
                u.readers[v] += 1
            for o in st.outs:
                u.writers[o] += 1
        elif isinstance(st, A.ChannelPut):
            u.readers[st.name] += 1
            for op, it in st.items:
                if op == "^" and isinstance(it, A.Var):
                    u.relay_uses[it.name] += 1
                    continue
                for v in expr_vars(it):
                    u.readers[v] += 1
                if isinstance(it, A.Msg):
                    for o in it.outs:
                        u.writers[o] += 1
    return u


def _diag(sev, code, msg, span, proc) -> Diagnostic:
    return Diagnostic(sev, code, msg, span or Span(0, 0, 0), proc)


def check_single_writer(decl: A.ProcDecl) -> list[Diagnostic]:
    h = decl.header
    name = h.name
    inputs = [p.name for p in h.inputs]
    outputs = [p.name for p in h.outputs]
    out: list[Diagnostic] = []
    for g in decl.groups:
        for r in g:
            u = rule_use(r)
            span = r.span
            bound = set(inputs) | set(u.captures) | set(u.relays)
            for v in u.readers:
                if v in u.replies and u.readers[v] and v not in u.writers:
                    out.append(_diag(ERROR, "ReadOfReplySlot", f"{v} is a reply slot and cannot be read unless written", span, name))
            for o in outputs:
                n = u.writers[o]
                if o in u.closed:
                    if n:
                        out.append(_diag(ERROR, "MultipleWriters", f"{o} is closed on the left and written", span, name))
                elif n == 0:
                    out.append(_diag(ERROR, "MissingWriter", f"output {o} is not written", span, name))
                elif n > 1:
                    out.append(_diag(ERROR, "MultipleWriters", f"{o} has {n} writers", span, name))
            for v in u.replies:
                n = u.writers[v]
                if n == 0:
                    out.append(_diag(ERROR, "MissingWriter", f"reply {v} is not written", span, name))
                elif n > 1:
                    out.append(_diag(ERROR, "MultipleWriters", f"reply {v} has {n} writers", span, name))
            for v in bound:
                if u.writers[v]:
                    out.append(_diag(ERROR, "WriteToInput", f"{v} is an input and cannot be written", span, name))
            for v in u.captures:
                if "%" not in v and v not in u.replies and not u.readers[v] and not u.writers[v] and v not in inputs:
                    out.append(_diag(WARNING, "UnusedCapture", f"{v} is matched but never used", span, name))
            fresh = (set(u.writers) | set(u.readers)) - bound - set(outputs) - set(u.replies)
            for v in sorted(fresh):
                if u.writers[v] == 0:
                    out.append(_diag(ERROR, "UnwrittenFuture", f"{v} has no writer", span, name))
                elif u.writers[v] > 1:
                    out.append(_diag(ERROR, "MultipleWriters", f"{v} has {u.writers[v]} writers", span, name))
                elif u.readers[v] == 0:
                    out.append(_diag(ERROR, "UnreadFuture", f"{v} is written but never read", span, name))
            for item in r.lhs:
                if isinstance(item, A.Guard):
                    for v in list(expr_vars(item.left)) + list(expr_vars(item.right)):
                        if v not in bound:
                            out.append(_diag(ERROR, "GuardOnUnboundVar", f"guard reads {v} which is not an input", item.span or span, name))
    for i in inputs:
        if kind(i) == "future" and decl.groups and all(
            not rule_use(r).readers[i] for g in decl.groups for r in g
        ):
            out.append(_diag(WARNING, "UnusedInput", f"input {i} is never read", decl.span, name))
    return out


def check_handle_rules(decl: A.ProcDecl, signatures: dict[str, A.Header] | None = None) -> list[Diagnostic]:
    name = decl.header.name
    inputs = {p.name for p in decl.header.inputs}
    outputs = {p.name for p in decl.header.outputs}
    out: list[Diagnostic] = []
    sigs = signatures or {}
    for g in decl.groups:
        for r in g:
            span = r.span
            for item in r.lhs:
                if isinstance(item, A.Match):
                    hs = [v for v in expr_vars(item.pattern) if kind(v) == "handle"]
                    if hs or kind(item.var) == "handle":
                        out.append(_diag(ERROR, "HandleInFutureTuple", f"future {item.var} cannot carry handle {', '.join(hs) or item.var}", item.span or span, name))
                elif isinstance(item, (A.ChannelGet, A.Close)):
                    if kind(item.name) == "handle" and item.name not in outputs:
                        out.append(_diag(ERROR, "NotHandleOwner", f"{item.name} is not an output handle of {name}", item.span or span, name))
            for st in r.rhs:
                if isinstance(st, A.Bind):
                    hs = [v for v in expr_vars(st.term) if kind(v) == "handle"]
                    if kind(st.name) == "handle":
                        out.append(_diag(ERROR, "TupleAssignedToHandle", f"handle {st.name} cannot be bound to a tuple", st.span or span, name))
                    elif hs:
                        out.append(_diag(ERROR, "HandleInFutureTuple", f"future {st.name} cannot carry handle {', '.join(hs)}", st.span or span, name))
                elif isinstance(st, A.Alias) and isinstance(st.expr, A.Var):
                    if kind(st.name) != kind(st.expr.name):
                        out.append(_diag(ERROR, "HandleFutureAlias", f"{st.name} and {st.expr.name} differ in kind", st.span or span, name))
                elif isinstance(st, A.ProcessCall) and isinstance(st.expr, A.Call):
                    out.extend(_check_call(st, sigs, name, span))
                elif isinstance(st, A.ChannelPut):
                    if kind(st.name) == "future" and any(isinstance(it, A.Msg) for _, it in st.items):
                        out.append(_diag(ERROR, "SendToFuture", f"{st.name} is a future", st.span or span, name))
    del inputs
    return out


def _check_call(st: A.ProcessCall, sigs, proc, span) -> list[Diagnostic]:
    call = st.expr
    out = []
    if call.name in BUILTINS:
        nin, nout = BUILTINS[call.name]
        if len(call.args) != nin or len(st.outs) != nout:
            out.append(_diag(ERROR, "ArityMismatch", f"{call.name} takes {nin} inputs and {nout} output", st.span or span, proc))
        return out
    h = sigs.get(call.name)
    if h is None:
        if sigs:
            out.append(_diag(WARNING, "UnknownProcedure", f"no declaration for {call.name}", st.span or span, proc))
        return out
    if len(call.args) != len(h.inputs) or len(st.outs) != len(h.outputs):
        out.append(
            _diag(ERROR, "ArityMismatch", f"{call.name} takes {len(h.inputs)} inputs and {len(h.outputs)} outputs", st.span or span, proc)
        )
        return out
    for a, p in zip(call.args, h.inputs):
        if isinstance(a, A.Var) and kind(a.name) != kind(p.name):
            out.append(_diag(ERROR, "KindMismatch", f"{a.name} passed as {call.name} parameter {p.name}", st.span or span, proc))
        elif not isinstance(a, A.Var) and kind(p.name) == "handle":
            out.append(_diag(ERROR, "KindMismatch", f"constant passed as handle parameter {p.name}", st.span or span, proc))
    for o, p in zip(st.outs, h.outputs):
        if kind(o) != kind(p.name):
            out.append(_diag(ERROR, "KindMismatch", f"{o} receives {call.name} output {p.name}", st.span or span, proc))
    return out


def check_message_relay(decl: A.ProcDecl) -> list[Diagnostic]:
    name = decl.header.name
    out: list[Diagnostic] = []
    for g in decl.groups:
        for r in g:
            u = rule_use(r)
            for m in u.relays:
                n = u.relay_uses[m]
                if u.readers[m] or u.writers[m]:
                    out.append(_diag(ERROR, "RelayInspected", f"relayed message {m} may only be resent with ^", r.span, name))
                elif n == 0:
                    out.append(_diag(ERROR, "RelayDropped", f"relayed message {m} is never resent", r.span, name))
                elif n > 1:
                    out.append(_diag(ERROR, "RelayDuplicated", f"relayed message {m} is resent {n} times", r.span, name))
            for m, n in u.relay_uses.items():
                if m not in u.relays:
                    out.append(_diag(ERROR, "RelayOfNonMessage", f"{m} was not captured with ?", r.span, name))
    return out


def check_ensemble(calls, external: set[str] | frozenset = frozenset(), proc: str = "") -> list[Diagnostic]:
    """Single-writer check across a set of top-level process creations.

    *calls* are ``ProcessCall`` statements (or ``(name, args, outs)``
    triples); *external* names are bound outside the ensemble."""
    writers: Counter = Counter()
    readers: Counter = Counter()
    for c in calls:
        if isinstance(c, A.ProcessCall):
            args = list(expr_vars(c.expr))
            outs = c.outs
        else:
            _, args, outs = c
        for v in args:
            readers[v] += 1
        for o in outs:
            writers[o] += 1
    out = []
    for v in sorted(set(writers) | set(readers)):
        if v in external:
            if writers[v]:
                out.append(_diag(ERROR, "MultipleWriters", f"{v} is bound outside and written", None, proc))
            continue
        if writers[v] == 0:
            out.append(_diag(ERROR, "UnwrittenFuture", f"{v} has no writer", None, proc))
        elif writers[v] > 1:
            out.append(_diag(ERROR, "MultipleWriters", f"{v} has {writers[v]} writers", None, proc))
        elif readers[v] == 0:
            out.append(_diag(WARNING, "UnreadFuture", f"{v} is never read", None, proc))
    return out


def check_program(decls: list[A.ProcDecl], extra: dict[str, A.Header] | None = None) -> list[Diagnostic]:
    sigs = {d.header.name: d.header for d in decls}
    if extra:
        sigs = {**extra, **sigs}
    out: list[Diagnostic] = []
    for d in decls:
        out.extend(check_single_writer(d))
        out.extend(check_handle_rules(d, sigs))
        out.extend(check_message_relay(d))
    return out
