"""Bracketed (curried) header arguments become a chain of relay objects."""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A


def curried_name(base: str, i: int) -> str:
    return f"{base}%c{i}"


def expand_currying(decl: A.ProcDecl) -> list[A.ProcDecl]:
    """``#p(a..)[b1 .. bn] -> outs`` becomes relays ``p``, ``p%c1`` .. and a
    final ``p%cn`` holding the original rules over the full argument list."""
    h = decl.header
    if not h.curried:
        return [decl]
    n = len(h.curried)
    taken = {p.name for p in h.inputs + h.curried + h.outputs}
    self_name = "Self" if "Self" not in taken else "Self%r"

    if h.anon == "<":
        final_outs = ["return%r"]
    elif h.anon == "~":
        final_outs = ["Return%r"]
    else:
        final_outs = [p.name for p in h.outputs]

    out: list[A.ProcDecl] = []
    for i in range(n):
        name = h.name if i == 0 else curried_name(h.name, i)
        params = h.inputs + h.curried[:i]
        val = h.curried[i]
        nxt = curried_name(h.name, i + 1)
        replies = ["Return%r"] if i < n - 1 else final_outs
        relay = A.Rule(
            [A.ChannelGet(self_name, [(".", A.Msg("", [A.Var(val.name)], list(replies)))])],
            1,
            [A.ProcessCall(A.Call(nxt, [A.Var(p.name) for p in params] + [A.Var(val.name)]), list(replies))],
            span=decl.span,
        )
        close = A.Rule([A.Close(self_name)], 2, [], span=decl.span)
        header = A.Header(name, [A.Param(p.name) for p in params], [], [A.Param(self_name)], None, h.span)
        out.append(A.ProcDecl(header, groups=[[relay, close]], span=decl.span))
    final_header = replace(h, name=curried_name(h.name, n), inputs=h.inputs + h.curried, curried=[])
    out.append(replace(decl, header=final_header))
    return out
