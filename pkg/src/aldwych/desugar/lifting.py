"""Embedded procedures, if-then-else and sequencing become separate procedures.

After lifting, no rule has a body and no rhs holds ``IfThenElse``,
``Sequence`` or ``LocalDecl``.  Every rule is either final (``bars >= 2``,
``target is None``) or continues into ``target`` (``bars == 1``) whose
header is ``target_header``; names in that header are in scope in the rule.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass, replace

from .. import ast as A
from ..errors import DesugarError
from .common import Fresh, lhs_bound, msg_reply_outs, stmt_writes

TRUE = A.Const("true")
FALSE = A.Const("false")


def names_used(obj, acc: list | None = None) -> list:
    """Every variable name mentioned anywhere in *obj*, in order of appearance."""
    if acc is None:
        acc = []
    if isinstance(obj, A.Var):
        acc.append(obj.name)
    elif isinstance(obj, (A.ChannelGet, A.Close, A.ChannelPut, A.Bind, A.Alias)):
        if obj.name:
            acc.append(obj.name)
    elif isinstance(obj, A.Match):
        acc.append(obj.var)
    elif isinstance(obj, A.LocalDecl):
        acc.extend(obj.names)
    if isinstance(obj, (list, tuple)):
        for x in obj:
            names_used(x, acc)
        return acc
    if isinstance(obj, dict):
        for v in obj.values():
            if isinstance(v, str):
                acc.append(v)
        return acc
    if is_dataclass(obj) and not isinstance(obj, (A.Header,)):
        for f in fields(obj):
            if f.name in ("span", "target_header"):
                continue
            v = getattr(obj, f.name)
            if f.name == "outs":
                acc.extend(v)
            elif isinstance(v, (list, tuple, dict)) or is_dataclass(v):
                names_used(v, acc)
    return acc


@dataclass
class Cont:
    """Where a rule goes after its rhs: a procedure, or nowhere (final)."""

    target: str | None
    header: A.Header | None


FINAL = Cont(None, None)


class _Lifter:
    def __init__(self, decl: A.ProcDecl, fresh: Fresh):
        self.root = decl
        self.fresh = fresh
        self.out: list[A.ProcDecl] = []

    def new_name(self) -> str:
        return self.fresh(self.root.header.name)

    def run(self):
        h = self.root.header
        level = (h.name, h)
        groups = [[self.rule(r, level, [level]) for r in g] for g in self.root.groups]
        self.out.insert(0, replace(self.root, groups=groups))
        return self.out

    @staticmethod
    def resolve(bars: int, stack) -> Cont:
        depth = len(stack) - 1
        if bars <= 1:
            return Cont(*stack[-1])
        up = bars - 1
        if up <= depth:
            return Cont(*stack[depth - up])
        return FINAL

    # ------------------------------------------------------------------ rules
    def rule(self, r: A.Rule, owner, stack, cont: Cont | None = None) -> A.Rule:
        """Lift whatever *r* embeds.  *owner* is the procedure holding *r*;
        *stack* the nesting levels used to interpret bar counts."""
        plain = [s for s in r.rhs if not isinstance(s, (A.IfThenElse, A.Sequence, A.LocalDecl))]
        control = [s for s in r.rhs if isinstance(s, (A.IfThenElse, A.Sequence))]
        local_names = [n for s in r.rhs if isinstance(s, A.LocalDecl) for n in s.names]
        if len(control) > 1:
            raise DesugarError("MultipleControl", "only one conditional or sequence per rule", r.span)
        if r.body and control:
            raise DesugarError("MultipleControl", "a rule cannot both embed a block and branch", r.span)
        if cont is None:
            cont = self.resolve(r.bars, stack)

        if r.body:
            name, header = self.lifted_header(stack[-1][1], owner[1], r, plain, local_names, r.body, None)
            level = (name, header)
            inner = stack + [level]
            groups = [[self.rule(br, level, inner) for br in g] for g in r.body]
            self.out.append(A.ProcDecl(header, groups=groups, span=r.span))
            return self.finish(r, plain, Cont(name, header), owner)

        if control:
            c = control[0]
            cond = c.cond.name if isinstance(c, A.IfThenElse) else None
            name, header = self.lifted_header(stack[-1][1], owner[1], r, plain, local_names, c, cond)
            level = (name, header)
            if isinstance(c, A.IfThenElse):
                rules = [
                    self.branch_rule(c.then, TRUE, cond, level, stack, cont, c.span),
                    self.branch_rule(c.else_, FALSE, cond, level, stack, cont, c.span),
                ]
            else:
                rules = [self.branch_rule(c.second, None, None, level, stack, cont, c.span)]
            self.out.append(A.ProcDecl(header, groups=[rules], span=c.span))
            return self.finish(r, plain, Cont(name, header), owner)

        self.check_scope(r, plain, owner, cont)
        return self.finish(r, plain, cont, owner)

    def branch_rule(self, b: A.Branch, value, cond, level, stack, cont, span) -> A.Rule:
        lhs = [A.Match(cond, value)] if cond is not None else []
        r = A.Rule(lhs, 1, list(b.stmts), b.body, span=span, versions=dict(b.versions))
        # conditionals do not open a nesting level: bars inside the branch
        # keep counting from the enclosing block
        return self.rule(r, level, stack, None if b.body else cont)

    def finish(self, r: A.Rule, plain, cont: Cont, owner) -> A.Rule:
        if cont.target is None:
            return replace(r, rhs=plain, body=None, bars=max(r.bars, 2), target=None, target_header=None)
        return replace(r, rhs=plain, body=None, bars=1, target=cont.target, target_header=cont.header)

    def check_scope(self, r: A.Rule, plain, owner, cont: Cont):
        root_outs = {p.name for p in self.root.header.outputs}
        keep = {p.name for p in cont.header.outputs} if cont.header else root_outs
        written = {w for s in plain for w in stmt_writes(s)}
        written |= {k for k, v in r.versions.items()}
        for p in owner[1].outputs:
            if p.name not in keep and p.name not in root_outs and p.name not in written:
                raise DesugarError("LocalOutOfScopeNotWritten", f"{p.name} must be written before leaving its block", r.span)

    # ---------------------------------------------------------------- headers
    def lifted_header(self, base: A.Header, own: A.Header, r: A.Rule, plain, local_names, part, cond):
        have = {p.name for p in base.inputs + base.outputs}
        lhs_in = [p.name for p in own.inputs]
        lhs_in += [n for i in r.lhs for n in lhs_bound(i) if n not in msg_reply_outs(i)]
        lhs_in += [v for v in r.versions.values() if v]
        lhs_out = [p.name for p in own.outputs]
        lhs_out += [n for i in r.lhs for n in msg_reply_outs(i)]
        written = [w for s in plain for w in stmt_writes(s)]
        used = set(names_used(part))
        ins: list[str] = []
        outs: list[str] = []
        for n in lhs_in + written + local_names:
            if n in used and n not in have and n not in ins and n != cond:
                if n in lhs_in or n in written:
                    ins.append(n)
        for n in lhs_out + local_names:
            if n in used and n not in have and n not in ins and n not in outs:
                outs.append(n)
        first = [A.Param(cond)] if cond else []
        header = A.Header(
            self.new_name(),
            first + [A.Param(n) for n in ins] + list(base.inputs),
            [],
            list(base.outputs) + [A.Param(n) for n in outs],
            None,
            r.span,
        )
        return header.name, header


def lift_embedded_blocks(decl: A.ProcDecl, fresh: Fresh | None = None) -> list[A.ProcDecl]:
    fresh = fresh or Fresh.above(decl)
    return _Lifter(decl, fresh).run()
