"""Independent reference implementations used as test oracles."""

from __future__ import annotations

import heapq
import itertools


def sorted_merge(a: list[int], b: list[int]) -> list[int]:
    return list(heapq.merge(a, b))


def delete_between(items: list[str]) -> list[str]:
    """Drop everything from a ``stop`` up to and including the next ``start``.

    An unmatched ``stop`` drops the rest of the stream."""
    out, deleting = [], False
    for x in items:
        if deleting:
            if x == "start":
                deleting = False
        elif x == "stop":
            deleting = True
        else:
            out.append(x)
    return out


def interleavings(a: list, b: list) -> set[tuple]:
    """All merges of ``a`` and ``b`` preserving the order within each."""
    n = len(a) + len(b)
    out = set()
    for pos in itertools.combinations(range(n), len(a)):
        ia, ib, res = iter(a), iter(b), []
        for i in range(n):
            res.append(next(ia) if i in pos else next(ib))
        out.add(tuple(res))
    return out


def delete_count_between(items: list[str]) -> tuple[list[str], list[int]]:
    """Like :func:`delete_between`, also reporting how many items each
    deleted stretch held (an unterminated stretch is reported at the end)."""
    out, counts, deleting, n = [], [], False, 0
    for x in items:
        if deleting:
            if x == "start":
                counts.append(n)
                deleting = False
            else:
                n += 1
        elif x == "stop":
            deleting, n = True, 0
        else:
            out.append(x)
    if deleting:
        counts.append(n)
    return out, counts
