"""Render surface ASTs back to Aldwych source."""

from __future__ import annotations

from . import ast as A

_SIMPLE = (A.Var, A.Const, A.Num, A.Call, A.AnonSelf, A.Tup)


def _names(names: list[str]) -> str:
    return names[0] if len(names) == 1 else "(" + ", ".join(names) + ")"


def term(e: A.Expr, top: bool = True) -> str:
    """Print a term in tuple/pattern position (bare names are constants at the top)."""
    if isinstance(e, A.Const):
        if e.name == "$":
            return "$"
        return e.name if top else f"'{e.name}'"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Num):
        return str(e.value)
    if isinstance(e, A.Tup):
        if e.tag == ":":
            return f"{term(e.args[0], False)} : {term(e.args[1], False)}"
        return f"{e.tag}(" + ", ".join(term(a, False) if not _is_expr_only(a) else expr(a) for a in e.args) + ")"
    return "(" + expr(e) + ")"


def _is_expr_only(e: A.Expr) -> bool:
    return not isinstance(e, (A.Var, A.Const, A.Num, A.Tup))


def msg(m: A.Msg, pattern: bool = False, outs: bool = True) -> str:
    s = m.name
    if m.args or not m.name:
        if pattern:
            s += "(" + ", ".join(term(a, False) for a in m.args) + ")"
        else:
            s += "(" + ", ".join(expr(a) for a in m.args) + ")"
    if m.anon:
        s += "-"
    elif outs and m.outs:
        s += " → " + _names(m.outs)
    return s


def expr(e: A.Expr) -> str:
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Const):
        return "$" if e.name == "$" else f"'{e.name}'"
    if isinstance(e, A.Num):
        return str(e.value)
    if isinstance(e, A.Tup):
        return term(e, top=False)
    if isinstance(e, A.Call):
        return f"{e.name}(" + ", ".join(expr(a) for a in e.args) + ")"
    if isinstance(e, A.NamedArg):
        return f"{e.name} ← {expr(e.value)}"
    if isinstance(e, A.AnonSelf):
        return e.which
    if isinstance(e, A.BinOp):
        return f"{_operand(e.left, e.op, False)} {e.op} {_operand(e.right, e.op, True)}"
    if isinstance(e, A.Juxt):
        left = expr(e.left) if isinstance(e.left, (A.Juxt,) + _SIMPLE + (A.DotSend, A.TildeChain)) else f"({expr(e.left)})"
        right = expr(e.right) if isinstance(e.right, _SIMPLE + (A.DotSend, A.TildeChain)) else f"({expr(e.right)})"
        return f"{left} {right}"
    if isinstance(e, (A.DotSend, A.TildeChain)):
        sep = "." if isinstance(e, A.DotSend) else "~"
        tgt = e.target
        t = expr(tgt) if isinstance(tgt, (A.Var, A.Call, A.AnonSelf)) else f"({expr(tgt)})"
        parts = []
        for i, m in enumerate(e.msgs):
            chained = m.outs and i < len(e.msgs) - 1
            parts.append(msg(m, outs=bool(chained) or (bool(m.outs) and i == len(e.msgs) - 1)).replace(" → ", "→"))
        return t + "".join(sep + p for p in parts)
    if isinstance(e, A.Msg):
        return msg(e)
    raise TypeError(e)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _operand(e: A.Expr, op: str, right: bool) -> str:
    if isinstance(e, A.BinOp):
        p, q = _PREC.get(e.op, 0), _PREC.get(op, 0)
        if p < q or (right and p == q) or q == 0 and p == 0:
            return f"({expr(e)})"
    if isinstance(e, A.Juxt):
        return f"({expr(e)})"
    return expr(e)


def lhs_item(it: A.LhsItem) -> str:
    if isinstance(it, A.Match):
        return f"{it.var}={term(it.pattern)}"
    if isinstance(it, A.Close):
        return f"{it.name}$"
    if isinstance(it, A.Guard):
        return f"{expr(it.left)} {it.op} {expr(it.right)}"
    s = it.name or ""
    for i, (op, p) in enumerate(it.items):
        if it.lookahead == i:
            s += "/"
        if op == "?":
            s += "?" + p.name
        elif isinstance(p, A.Msg):
            s += ("." if it.name else "") + msg(p, pattern=True)
        else:
            s += "." + term(p)
    return s


def statement(st: A.Statement, indent: str) -> str:
    if isinstance(st, A.Bind):
        return f"{st.name}={term(st.term)}"
    if isinstance(st, A.Alias):
        return f"{st.name}←{expr(st.expr)}"
    if isinstance(st, A.ProcessCall):
        e = expr(st.expr)
        if isinstance(st.expr, A.Juxt):
            e = f"({e})"
        return e + (" → " + _names(st.outs) if st.outs else "")
    if isinstance(st, A.ChannelPut):
        s = st.name
        for i, (op, p) in enumerate(st.items):
            if op == "^":
                s += "^" + (expr(p) if isinstance(p, _SIMPLE) else f"({expr(p)})")
            elif isinstance(p, A.Msg):
                last = i == len(st.items) - 1
                s += "." + (msg(p).replace(" → ", "→") if not last else msg(p))
            else:
                s += "." + term(p)
        return s + ("$" if st.close else "")
    if isinstance(st, A.AnonReturn):
        return (">=" + term(st.value)) if st.bind else ("> " + expr(st.value))
    if isinstance(st, A.Become):
        return "<=" + expr(st.value)
    if isinstance(st, A.LocalDecl):
        return "<(" + ", ".join(st.names) + ")"
    if isinstance(st, A.IfThenElse):
        inner = indent + "  "
        return (
            f"? {expr(st.cond)}\n{inner}: {branch(st.then, inner)};\n{inner}: {branch(st.else_, inner)}"
        )
    if isinstance(st, A.Sequence):
        inner = indent + "  "
        first = ", ".join(statement(s, inner) for s in st.first)
        return f"+ {first};\n{inner}{branch(st.second, inner)}"
    raise TypeError(st)


def _rhs(stmts: list[A.Statement], body, indent: str) -> str:
    parts: list[str] = []
    for st in stmts:
        text = statement(st, indent)
        if isinstance(st, (A.IfThenElse, A.Sequence)) and parts:
            parts[-1] += "\n" + indent + text
        else:
            parts.append(text)
    s = ", ".join(parts)
    if body is not None:
        s += (" " if s else "") + groups(body, indent + "  ")
    return s


def branch(b: A.Branch, indent: str) -> str:
    bars = ("|" * b.bars + " ") if b.bars else ""
    return bars + _rhs(b.stmts, b.body, indent)


def rule(r: A.Rule, indent: str) -> str:
    lhs = ", ".join(lhs_item(i) for i in r.lhs)
    rhs = _rhs(r.rhs, r.body, indent)
    return f"{lhs} {'|' * r.bars} {rhs}".strip()


def groups(gs: list[list[A.Rule]], indent: str = "  ") -> str:
    outer = indent[:-2]
    lines = ["{"]
    for gi, g in enumerate(gs):
        if gi:
            lines.append(outer + ":")
        for ri, r in enumerate(g):
            last = ri == len(g) - 1 and gi == len(gs) - 1
            lines.append(indent + rule(r, indent) + ("" if last else ";"))
    lines.append(outer + "}")
    return "\n".join(lines)


def header(h: A.Header) -> str:
    def param(p: A.Param) -> str:
        return p.name + (f" ← {expr(p.default)}" if p.default is not None else "")

    s = f"#{h.name}(" + ", ".join(param(p) for p in h.inputs) + ")"
    if h.curried:
        s += "[" + ", ".join(param(p) for p in h.curried) + "]"
    if h.anon:
        s += " " + h.anon
    elif h.outputs:
        s += " → " + _names([p.name for p in h.outputs])
    return s


def decl(d: A.ProcDecl) -> str:
    s = header(d.header)
    if d.macro is not None:
        return s + " == " + ", ".join(statement(st, "  ") for st in d.macro) + ";"
    if d.init is not None:
        s += "\n= " + ", ".join(statement(st, "  ") for st in d.init)
    return s + "\n" + groups(d.groups)


def program(p: A.SurfaceProgram) -> str:
    return "\n\n".join(decl(d) for d in p.declarations) + ("\n" if p.declarations else "")
