"""Aldwych: a compiler front-end and seeded concurrent runtime."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import CoreProgram, format_core, parse_core
from .errors import AldwychError, Diagnostic, ModeCheckError

__version__ = "0.1.0"


@dataclass
class Compiled:
    """Result of :func:`compile_source`; ``core`` is None when errors occurred."""

    core: CoreProgram | None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    surface: object = None

    @property
    def ok(self) -> bool:
        return self.core is not None and not any(d.is_error for d in self.diagnostics)


def _error(e: AldwychError) -> Diagnostic:
    return Diagnostic("ERROR", e.code, e.message, e.span)


def compile_source(text: str, entry: str | None = None) -> Compiled:
    """Parse, lower, mode-check and convert Aldwych source text."""
    from .desugar import desugar
    from .parser import parse

    diags: list[Diagnostic] = []
    try:
        surface = parse(text)
    except AldwychError as e:
        return Compiled(None, [_error(e)])
    try:
        core = desugar(surface, entry, diags)
    except ModeCheckError:
        return Compiled(None, diags, surface)
    except AldwychError as e:
        return Compiled(None, diags + [_error(e)], surface)
    return Compiled(core, diags, surface)


__all__ = ["Compiled", "CoreProgram", "compile_source", "format_core", "parse_core", "__version__"]
