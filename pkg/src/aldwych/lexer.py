"""Tokenizer for Aldwych source text."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IllegalCharacter, Span

IDENT = "ident"
CAP = "cap"
NUMBER = "number"
ATOM = "atom"
PUNCT = "punct"
ARROW = "arrow"  # -> or →
LARROW = "larrow"  # <- or ←
BAR = "bar"
END = "end"

_SINGLE = set("#()[]{},;:.?^$/=<>+-*~!")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span
    count: int = 0  # bar-run length
    offset: int = 0  # absolute source offset, used for adjacency tests
    end: int = 0

    def is_(self, text: str) -> bool:
        return self.kind in (PUNCT, ARROW, LARROW) and self.text == text


def _ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def tokenize(source: str) -> list[Token]:
    """Split *source* into tokens.

    Runs of ``|`` separated only by whitespace form one bar token whose
    ``count`` is the number of bars.  ``→``/``->`` and ``←``/``<-`` are
    normalized to ARROW and LARROW.  ``//`` comments run to end of line.
    """
    toks: list[Token] = []
    i, n = 0, len(source)
    line, col = 1, 1

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    def emit(kind: str, text: str, start: int, sline: int, scol: int, count: int = 0) -> None:
        toks.append(Token(kind, text, Span(sline, scol, i - start), count, start, i))

    while i < n:
        c = source[i]
        if c.isspace():
            advance(1)
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        start, sline, scol = i, line, col
        if c == "|":
            count = 0
            while i < n and (source[i] == "|" or source[i] in " \t\r\n"):
                # a bar run absorbs whitespace only when another bar follows
                if source[i] == "|":
                    count += 1
                    advance(1)
                    continue
                j = i
                while j < n and source[j] in " \t\r\n":
                    j += 1
                if j < n and source[j] == "|":
                    advance(j - i)
                else:
                    break
            emit(BAR, "|" * count, start, sline, scol, count)
            continue
        if c == "→":
            advance(1)
            emit(ARROW, "->", start, sline, scol)
            continue
        if c == "←":
            advance(1)
            emit(LARROW, "<-", start, sline, scol)
            continue
        if source.startswith("->", i):
            advance(2)
            emit(ARROW, "->", start, sline, scol)
            continue
        if source.startswith("<-", i):
            advance(2)
            emit(LARROW, "<-", start, sline, scol)
            continue
        if c == "∼":
            advance(1)
            emit(PUNCT, "~", start, sline, scol)
            continue
        if c.isdigit():
            while i < n and source[i].isdigit():
                advance(1)
            emit(NUMBER, source[start:i], start, sline, scol)
            continue
        if c.isalpha() or c == "_":
            while i < n and _ident_char(source[i]):
                advance(1)
            text = source[start:i]
            emit(CAP if text[0].isupper() else IDENT, text, start, sline, scol)
            continue
        if c == "'":
            advance(1)
            while i < n and source[i] != "'":
                if source[i] == "\n":
                    raise IllegalCharacter("unterminated quoted atom", Span(sline, scol))
                advance(1)
            if i >= n:
                raise IllegalCharacter("unterminated quoted atom", Span(sline, scol))
            advance(1)
            emit(ATOM, source[start + 1 : i - 1], start, sline, scol)
            continue
        if c in _SINGLE:
            advance(1)
            emit(PUNCT, c, start, sline, scol)
            continue
        raise IllegalCharacter(f"illegal character {c!r}", Span(sline, scol))
    toks.append(Token(END, "", Span(line, col, 0), 0, i, i))
    return toks
