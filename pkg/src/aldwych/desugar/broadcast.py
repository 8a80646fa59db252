"""Message patterns without a handle apply to every output handle."""

from __future__ import annotations

from dataclasses import replace

from .. import ast as A
from ..errors import DesugarError
from .common import deep, header_outputs


def _is_bare(item) -> bool:
    return isinstance(item, A.ChannelGet) and item.name is None


def _reads_handle_messages(groups, handles) -> bool:
    return any(
        isinstance(i, (A.ChannelGet, A.Close)) and i.name in handles for g in groups for r in g for i in r.lhs
    )


def _has_close(groups, handles) -> bool:
    return any(isinstance(i, A.Close) and i.name in handles for g in groups for r in g for i in r.lhs)


def broadcast_message_patterns(decl: A.ProcDecl) -> A.ProcDecl:
    handles = [n for n in header_outputs(decl.header) if A.is_handle_name(n)]
    groups = []
    for g in decl.groups:
        ng = []
        for r in g:
            if not any(_is_bare(i) for i in r.lhs):
                ng.append(r)
                continue
            if not handles:
                raise DesugarError("BareMessageNoHandles", f"{decl.header.name} has no output handle for bare messages", r.span)
            for h in handles:
                lhs = [replace(i, name=h) if _is_bare(i) else i for i in r.lhs]
                ng.append(replace(deep(r), lhs=deep(lhs)))
        groups.append(ng)
    if groups and _reads_handle_messages(groups, handles) and not _has_close(groups, handles):
        close = A.Rule([A.Close(h) for h in handles], 1, [], span=decl.span)
        groups[-1] = groups[-1] + [close]
    return replace(decl, groups=groups)
