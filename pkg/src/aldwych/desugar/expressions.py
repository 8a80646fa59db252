"""Flatten expressions: infix operators, nested calls, sends and juxtaposition.

After this pass every statement has one of the simple shapes

* ``Bind(x, term)`` with ``term`` built from variables, constants and tuples,
* ``Alias(x, Var)``,
* ``ProcessCall(Call(p, simple args), outs)``,
* ``ChannelPut(h, items)`` whose message arguments are simple,

plus ``LocalDecl``, and ``IfThenElse``/``Sequence`` whose condition is a
variable.
"""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from ..errors import DesugarError
from .common import BUILTIN_ARITH, BUILTIN_REL, Fresh, Signatures, expr_vars, header_inputs

_SIMPLE = (A.Var, A.Const, A.Num)


def _is_term(e) -> bool:
    if isinstance(e, _SIMPLE):
        return True
    return isinstance(e, A.Tup) and all(_is_term(a) for a in e.args)


class _Flatten:
    def __init__(self, sigs: Signatures, fresh: Fresh, inputs: set[str], calls_only: bool = False):
        self.sigs = sigs
        self.fresh = fresh
        self.inputs = inputs
        self.calls_only = calls_only

    def new(self, kind: str) -> str:
        return self.fresh("T" if kind == "handle" else "t")

    # ------------------------------------------------------------ expressions
    def flat(self, e, out: list, dest: str | None = None, kind: str = "future"):
        """Reduce *e* to a simple term, appending needed statements to *out*.

        When *dest* is given and *e* produces a fresh value, the value is
        written straight into *dest* and ``Var(dest)`` is returned."""
        if isinstance(e, _SIMPLE):
            return e
        if isinstance(e, A.Tup):
            return replace(e, args=[self.flat(a, out) for a in e.args])
        if isinstance(e, A.Call):
            args = self.args(e.name, e.args, out)
            name = dest or self.new(self.sigs.output_kind(e.name))
            out.append(A.ProcessCall(replace(e, args=args), [name], e.span))
            return A.Var(name, e.span)
        if self.calls_only:
            return e
        if isinstance(e, A.BinOp):
            op = BUILTIN_ARITH.get(e.op) or BUILTIN_REL.get(e.op)
            if op is None:
                raise DesugarError("UnknownOperator", f"unknown operator {e.op}", e.span)
            return self.flat(A.Call(op, [e.left, e.right], e.span), out, dest, kind)
        if isinstance(e, A.DotSend):
            target = self.flat(e.target, out, kind="handle")
            items = []
            last = None
            for i, m in enumerate(e.msgs):
                outs = list(m.outs)
                if i == len(e.msgs) - 1 and not outs:
                    outs = [dest or self.new(kind)]
                if outs:
                    last = outs[-1]
                items.append((".", replace(m, args=[self.flat(a, out) for a in m.args], outs=outs)))
            out.append(A.ChannelPut(self._handle(target), items, span=e.span))
            return A.Var(last, e.span)
        if isinstance(e, A.TildeChain):
            cur = self.flat(e.target, out, kind="handle")
            for i, m in enumerate(e.msgs):
                final = i == len(e.msgs) - 1
                reply = m.outs[-1] if m.outs else (dest if final and dest else self.new(kind if final else "handle"))
                args = [self.flat(a, out) for a in m.args]
                out.append(A.ChannelPut(self._handle(cur), [(".", replace(m, args=args, outs=[reply]))], span=e.span))
                cur = A.Var(reply, e.span)
            return cur
        if isinstance(e, A.Juxt):
            fn = self.flat(e.left, out, kind="handle")
            arg = self.flat(e.right, out)
            reply = dest or self.new(kind)
            out.append(A.ChannelPut(self._handle(fn), [(".", A.Msg("", [arg], [reply], span=e.span))], span=e.span))
            return A.Var(reply, e.span)
        raise DesugarError("UnsupportedExpression", f"cannot lower {type(e).__name__}", getattr(e, "span", None))

    def _handle(self, target) -> str:
        if not isinstance(target, A.Var):
            raise DesugarError("SendToNonHandle", "messages can only be sent to handles", getattr(target, "span", None))
        return target.name

    def args(self, callee: str, args, out):
        res = []
        for i, a in enumerate(args):
            kind = self.sigs.input_kind(callee, i) or "future"
            res.append(self.flat(a, out, kind=kind))
        return res

    # ------------------------------------------------------------- statements
    def stmts(self, stmts) -> list:
        out: list = []
        for st in stmts:
            self.stmt(st, out)
        return out

    def stmt(self, st, out: list):
        if isinstance(st, A.Bind):
            out.append(replace(st, term=self.flat(st.term, out)))
        elif isinstance(st, A.Alias):
            e = st.expr
            direct = st.name not in self.inputs and st.name not in set(expr_vars(e))
            kind = "handle" if A.is_handle_name(st.name) else "future"
            if isinstance(e, A.Var):
                out.append(st)
            elif direct and not isinstance(e, (A.Const, A.Num, A.Tup)):
                self.flat(e, out, dest=st.name, kind=kind)
            else:
                v = self.flat(e, out, kind=kind)
                if isinstance(v, A.Var) or self.calls_only:
                    out.append(replace(st, expr=v))
                else:
                    out.append(A.Bind(st.name, v, st.span))
        elif isinstance(st, A.ProcessCall):
            e = st.expr
            if isinstance(e, A.Call):
                args = self.args(e.name, e.args, out)
                out.append(replace(st, expr=replace(e, args=args)))
            elif self.calls_only:
                out.append(st)
            elif isinstance(e, (A.DotSend, A.TildeChain, A.Juxt)):
                if st.outs:
                    # extra outputs name the last reply(s)
                    if isinstance(e, (A.DotSend, A.TildeChain)):
                        msgs = list(e.msgs)
                        msgs[-1] = replace(msgs[-1], outs=list(msgs[-1].outs) + list(st.outs))
                        self.flat(replace(e, msgs=msgs), out)
                    else:
                        self.flat(e, out, dest=st.outs[0])
                else:
                    self._send_only(e, out)
            else:
                raise DesugarError("UnsupportedStatement", "expression used as a statement", st.span)
        elif isinstance(st, A.ChannelPut):
            items = []
            handle = A.is_handle_name(st.name)
            for op, it in st.items:
                if isinstance(it, A.Msg):
                    items.append((op, replace(it, args=[self.flat(a, out) for a in it.args])))
                elif handle and op == "^" and not isinstance(it, A.Var):
                    raise DesugarError("JuxtapositionOnMessage", "only a captured message may be relayed with ^", st.span)
                else:
                    items.append((op, self.flat(it, out)))
            out.append(replace(st, items=items))
        elif isinstance(st, A.IfThenElse):
            cond = self.flat(st.cond, out)
            if not isinstance(cond, A.Var) and not self.calls_only:
                t = self.new("future")
                out.append(A.Bind(t, cond, st.span))
                cond = A.Var(t)
            out.append(replace(st, cond=cond, then=self.branch(st.then), else_=self.branch(st.else_)))
        elif isinstance(st, A.Sequence):
            out.append(replace(st, first=self.stmts(st.first), second=self.branch(st.second)))
        else:
            out.append(st)

    def _send_only(self, e, out):
        """A send whose final reply (if any) is unused."""
        if isinstance(e, A.DotSend):
            target = self._handle(self.flat(e.target, out, kind="handle"))
            items = [(".", replace(m, args=[self.flat(a, out) for a in m.args])) for m in e.msgs]
            out.append(A.ChannelPut(target, items, span=e.span))
        else:
            self.flat(e, out)

    def branch(self, b: A.Branch) -> A.Branch:
        return replace(b, stmts=self.stmts(b.stmts), body=self.groups(b.body) if b.body else b.body)

    def groups(self, groups):
        return [[self.rule(r) for r in g] for g in groups]

    def rule(self, r: A.Rule) -> A.Rule:
        for item in r.lhs:
            if isinstance(item, A.Guard):
                for side in (item.left, item.right):
                    if not _is_term(side):
                        raise DesugarError("ComplexGuard", "guards compare variables and constants only", item.span)
        return replace(r, rhs=self.stmts(r.rhs), body=self.groups(r.body) if r.body else r.body)


def expand_expressions(decl: A.ProcDecl, sigs: Signatures | None = None, fresh: Fresh | None = None) -> A.ProcDecl:
    sigs = sigs or Signatures(A.SurfaceProgram([decl]))
    fresh = fresh or Fresh.above(decl)
    tr = _Flatten(sigs, fresh, set(header_inputs(decl.header)))
    return replace(decl, groups=tr.groups(decl.groups), init=tr.stmts(decl.init) if decl.init is not None else None)


def expand_embedded_calls(decl: A.ProcDecl, sigs: Signatures | None = None, fresh: Fresh | None = None) -> A.ProcDecl:
    """Only un-nest process calls: ``p(q(x))→y`` gives ``q(x)→z, p(z)→y``."""
    sigs = sigs or Signatures(A.SurfaceProgram([decl]))
    fresh = fresh or Fresh.above(decl)
    tr = _Flatten(sigs, fresh, set(header_inputs(decl.header)), calls_only=True)
    return replace(decl, groups=tr.groups(decl.groups), init=tr.stmts(decl.init) if decl.init is not None else None)
