"""Initialisation code, defaulted parameters and ``==`` macros."""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from ..errors import DesugarError
from .common import deep, expr_vars, map_expr, stmt_writes, walk_decl_exprs, walk_expr


def body_name(name: str) -> str:
    return f"{name}%body"


def split_init(decl: A.ProcDecl) -> list[A.ProcDecl]:
    """A declaration with ``= init`` becomes a wrapper running the init code
    and a body procedure taking the locals as extra inputs."""
    if decl.init is None:
        return [decl]
    h = decl.header
    locals_: list[str] = []
    work: list[A.Statement] = []
    for st in decl.init:
        if isinstance(st, A.LocalDecl):
            locals_.extend(st.names)
        else:
            work.append(st)
    written = {w for st in work for w in stmt_writes(st)}
    for name in locals_:
        if name not in written:
            raise DesugarError("InitDoesNotWriteLocal", f"initialisation does not write local {name}", decl.span)
    inner = body_name(h.name)
    call = A.Call(inner, [A.Var(p.name) for p in h.inputs] + [A.Var(n) for n in locals_])
    if h.anon:
        work.append(A.Become(call))
    else:
        work.append(A.ProcessCall(call, [p.name for p in h.outputs]))
    wrapper = A.ProcDecl(replace(h, curried=[]), groups=[[A.Rule([], 2, work, span=decl.span)]], span=decl.span)
    body_header = replace(h, name=inner, inputs=h.inputs + [A.Param(n) for n in locals_])
    return [wrapper, replace(decl, header=body_header, init=None)]


def _substitute(e, params: list[str], args: list[A.Expr]):
    env = dict(zip(params, args))
    return map_expr(deep(e), lambda v: deep(env[v.name]) if v.name in env else v)


def _leaf_macro_value(decl: A.ProcDecl) -> A.Expr | None:
    """The value of a macro whose body is one anonymous return with no calls."""
    body = decl.macro or []
    if len(body) != 1 or not isinstance(body[0], (A.AnonReturn, A.Become)):
        return None
    value = body[0].value
    found = []
    walk_expr(value, lambda n: found.append(n) or n)
    if any(isinstance(n, (A.Call, A.DotSend, A.TildeChain, A.Juxt, A.AnonSelf)) for n in found):
        return None
    return value


def apply_initialization(program: A.SurfaceProgram) -> A.SurfaceProgram:
    """Run init splitting, default materialisation and macro expansion."""
    decls: list[A.ProcDecl] = []
    for d in program.declarations:
        decls.extend(split_init(d))

    # macros
    macros: dict[str, tuple[list[str], A.Expr]] = {}
    for d in decls:
        if d.macro is None:
            continue
        params = [p.name for p in d.header.inputs]
        for st in d.macro:
            found = []
            walk_expr(getattr(st, "value", None) or getattr(st, "expr", None) or A.Const(""), lambda n: found.append(n) or n)
            if any(isinstance(n, A.Call) and n.name == d.header.name for n in found):
                raise DesugarError("RecursiveMacro", f"macro {d.header.name} calls itself", d.span)
        value = _leaf_macro_value(d)
        if value is not None:
            macros[d.header.name] = (params, value)

    # defaults
    defaults: dict[str, A.Header] = {d.header.name: d.header for d in decls if any(p.default is not None for p in d.header.inputs)}

    def fix_call(node):
        if isinstance(node, A.Call) and node.name in defaults:
            h = defaults[node.name]
            positional = [a for a in node.args if not isinstance(a, A.NamedArg)]
            named = {a.name: a.value for a in node.args if isinstance(a, A.NamedArg)}
            for key in named:
                if not any(p.name == key and p.default is not None for p in h.inputs):
                    raise DesugarError("OverrideOfNonDefaultParam", f"{key} is not a defaulted parameter of {h.name}", node.span)
            args: list[A.Expr] = []
            names = [p.name for p in h.inputs]
            for i, p in enumerate(h.inputs):
                if i < len(positional):
                    args.append(positional[i])
                elif p.name in named:
                    args.append(named[p.name])
                elif p.default is not None:
                    args.append(_substitute(p.default, names[: len(args)], args))
                else:
                    raise DesugarError("MissingArgument", f"call to {h.name} lacks {p.name}", node.span)
            return replace(node, args=args)
        if isinstance(node, A.Call) and any(isinstance(a, A.NamedArg) for a in node.args):
            raise DesugarError("OverrideOfNonDefaultParam", f"{node.name} has no defaulted parameters", node.span)
        if isinstance(node, A.Call) and node.name in macros:
            params, value = macros[node.name]
            return _substitute(value, params, node.args)
        return node

    out: list[A.ProcDecl] = []
    for d in decls:
        if d.header.name in macros:
            continue
        d = walk_decl_exprs(d, fix_call)
        if d.header.name in defaults:
            d = replace(d, header=replace(d.header, inputs=[replace(p, default=None) for p in d.header.inputs]))
        if d.macro is not None:
            d = replace(d, macro=None, groups=[[A.Rule([], 2, d.macro, span=d.span)]])
        out.append(d)
    # a macro-call statement whose value was inlined becomes an alias
    fixed: list[A.ProcDecl] = []
    for d in out:
        fixed.append(_calls_to_aliases(d))
    return A.SurfaceProgram(fixed)


def _calls_to_aliases(d: A.ProcDecl) -> A.ProcDecl:
    from .common import map_statements

    def fix(st):
        if isinstance(st, A.ProcessCall) and not isinstance(st.expr, (A.Call, A.DotSend, A.TildeChain, A.Juxt)):
            if len(st.outs) == 1:
                return [A.Alias(st.outs[0], st.expr, st.span)]
        return [st]

    def groups(gs):
        return [[replace(r, rhs=map_statements(r.rhs, fix), body=groups(r.body) if r.body else r.body) for r in g] for g in gs]

    return replace(d, groups=groups(d.groups), init=map_statements(d.init, fix) if d.init else d.init)


__all__ = ["apply_initialization", "split_init", "body_name", "expr_vars"]
