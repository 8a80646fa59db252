"""Diagnostics and exception types shared across the compiler."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOSPAN = Span(0, 0, 0)


class AldwychError(Exception):
    """Base class for positioned compiler errors."""

    code = "Error"

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span or NOSPAN

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.col}: {self.message}"


class IllegalCharacter(AldwychError):
    code = "IllegalCharacter"


class ParseError(AldwychError):
    code = "ParseError"

    def __init__(self, message: str, span: Span | None = None, expected: tuple[str, ...] = ()):
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(message, span)
        self.expected = expected


class DuplicateProcedure(AldwychError):
    code = "DuplicateProcedure"


class MultipleAnonymousReturns(AldwychError):
    code = "MultipleAnonymousReturns"


class DesugarError(AldwychError):
    """Raised by a lowering pass; ``code`` names the specific violation."""

    def __init__(self, code: str, message: str, span: Span | None = None):
        super().__init__(message, span)
        self.code = code


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "ERROR" | "WARNING"
    code: str
    message: str
    span: Span = NOSPAN
    proc: str = ""

    @property
    def is_error(self) -> bool:
        return self.severity == "ERROR"

    def format(self, filename: str = "<input>") -> str:
        return f"{self.severity} {self.code} {filename}:{self.span.line}:{self.span.col} {self.message}"


class ModeCheckError(AldwychError):
    """Carries the error diagnostics that stopped lowering."""

    code = "ModeCheck"

    def __init__(self, diagnostics: list[Diagnostic]):
        errs = [d for d in diagnostics if d.is_error]
        first = errs[0] if errs else None
        super().__init__(first.message if first else "mode check failed", first.span if first else None)
        self.diagnostics = diagnostics
