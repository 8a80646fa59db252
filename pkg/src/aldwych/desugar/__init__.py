"""Lowering from the surface language to the core language."""

from __future__ import annotations

from .. import ast as A
from ..core import CoreProgram
from ..errors import ModeCheckError
from .anonymous import expand_anonymous_forms
from .broadcast import broadcast_message_patterns
from .channels import expand_channel_sugar
from .common import Fresh, Signatures
from .currying import expand_currying
from .expressions import expand_embedded_calls, expand_expressions
from .handles import convert_handles_to_streams
from .initialization import apply_initialization
from .lifting import lift_embedded_blocks
from .recursion import expand_implicit_recursion
from .scoping import resolve_scoped_names

PASSES = (
    "currying",
    "initialization",
    "anonymous",
    "expressions",
    "embedded-calls",
    "channels",
    "broadcast",
    "lift",
    "recursion",
    "modecheck",
    "handles",
)


def run_pass(name: str, program: A.SurfaceProgram, fresh: Fresh | None = None, sigs: Signatures | None = None) -> A.SurfaceProgram:
    """Apply the single surface pass *name* to *program*."""
    if name not in PASSES[:9]:
        raise ValueError(f"unknown pass {name!r}")
    if name == "currying":
        return A.SurfaceProgram([x for d in program.declarations for x in expand_currying(resolve_scoped_names(d))])
    if name == "initialization":
        return apply_initialization(program)
    fresh = fresh or Fresh.above(program)
    sigs = sigs or Signatures(program)
    per_decl = {
        "anonymous": lambda d: [expand_anonymous_forms(d, sigs, fresh)],
        "expressions": lambda d: [expand_expressions(d, sigs, fresh)],
        "embedded-calls": lambda d: [expand_embedded_calls(d, sigs, fresh)],
        "channels": lambda d: [expand_channel_sugar(d, fresh)],
        "broadcast": lambda d: [broadcast_message_patterns(d)],
        "lift": lambda d: lift_embedded_blocks(d, fresh),
        "recursion": lambda d: [expand_implicit_recursion(d, fresh)],
    }[name]
    return A.SurfaceProgram([x for d in program.declarations for x in per_decl(d)])


def lower_surface(program: A.SurfaceProgram, until: str = "recursion") -> A.SurfaceProgram:
    """Run the surface-to-surface passes up to and including *until*."""
    if until not in PASSES[:9]:
        raise ValueError(f"unknown pass {until!r}")
    stop = PASSES.index(until)
    prog = run_pass("currying", program)
    if stop == 0:
        return prog
    prog = run_pass("initialization", prog)
    sigs = Signatures(prog)
    fresh = Fresh.above(prog)
    for name in PASSES[2 : stop + 1]:
        prog = run_pass(name, prog, fresh, sigs)
    return prog


def desugar(program: A.SurfaceProgram, entry: str | None = None, diagnostics: list | None = None) -> CoreProgram:
    """Lower *program* to core.  Raises :class:`ModeCheckError` when the mode
    check reports errors; warnings are appended to *diagnostics*."""
    from ..modecheck import check_program

    lowered = lower_surface(program)
    diags = check_program(lowered.declarations)
    if diagnostics is not None:
        diagnostics.extend(diags)
    if any(d.is_error for d in diags):
        raise ModeCheckError(diags)
    return convert_handles_to_streams(lowered.declarations, Fresh.above(lowered), entry)


__all__ = [
    "PASSES",
    "desugar",
    "lower_surface",
    "expand_currying",
    "apply_initialization",
    "expand_anonymous_forms",
    "expand_expressions",
    "expand_embedded_calls",
    "expand_channel_sugar",
    "broadcast_message_patterns",
    "lift_embedded_blocks",
    "expand_implicit_recursion",
    "convert_handles_to_streams",
]
