"""The flat core language: committed-choice rules over single-writer futures.

Core terms are immutable so rules can be hashed and compared.  A variable
flagged ``reply`` is a pattern variable that the rule writes rather than
reads (a back-communication slot in a handle-derived message).

Textual form (``emit-core``)::

    %aldwych-core 1
    proc p(u, v) -> (x, y)
      group
        rule
          match u = 'f'(w)
          guard >= m2 m1
          bind y = 'g'(v)
          call r(u, v, w) -> (y, x)
    end

Constants and tuple tags are quoted; variables are bare; reply slots carry a
leading ``@``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

CORE_HEADER = "%aldwych-core 1"


@dataclass(frozen=True)
class CVar:
    name: str
    reply: bool = False


@dataclass(frozen=True)
class CConst:
    name: str


@dataclass(frozen=True)
class CNum:
    value: int


@dataclass(frozen=True)
class CTuple:
    tag: str
    args: tuple["CTerm", ...]


CTerm = Union[CVar, CConst, CNum, CTuple]

NIL = CConst("$")


def cons(head: CTerm, tail: CTerm) -> CTuple:
    return CTuple(":", (head, tail))


def term_vars(t: CTerm) -> Iterator[CVar]:
    if isinstance(t, CVar):
        yield t
    elif isinstance(t, CTuple):
        for a in t.args:
            yield from term_vars(a)


@dataclass(frozen=True)
class CoreCall:
    name: str
    ins: tuple[CTerm, ...]
    outs: tuple[str, ...]


@dataclass
class CoreRule:
    matches: list[tuple[str, CTerm]] = field(default_factory=list)
    guards: list[tuple[str, CTerm, CTerm]] = field(default_factory=list)
    binds: list[tuple[str, CTerm]] = field(default_factory=list)
    calls: list[CoreCall] = field(default_factory=list)
    label: str = ""

    def lhs_vars(self) -> set[str]:
        out: set[str] = set()
        for _, pat in self.matches:
            out.update(v.name for v in term_vars(pat))
        return out

    def reply_vars(self) -> set[str]:
        return {v.name for _, pat in self.matches for v in term_vars(pat) if v.reply}


@dataclass
class CoreProc:
    name: str
    ins: list[str]
    outs: list[str]
    groups: list[list[CoreRule]] = field(default_factory=list)

    @property
    def rules(self) -> list[CoreRule]:
        return [r for g in self.groups for r in g]


@dataclass
class CoreProgram:
    procedures: list[CoreProc] = field(default_factory=list)
    entry: str | None = None

    def proc(self, name: str) -> CoreProc | None:
        for p in self.procedures:
            if p.name == name:
                return p
        return None

    @property
    def table(self) -> dict[str, CoreProc]:
        return {p.name: p for p in self.procedures}


# ----------------------------------------------------------------- printing


def _quote(s: str) -> str:
    return "'" + s.replace("\\", "\\\\").replace("'", "\\'") + "'"


def show_term(t: CTerm) -> str:
    if isinstance(t, CVar):
        return ("@" if t.reply else "") + t.name
    if isinstance(t, CConst):
        return _quote(t.name)
    if isinstance(t, CNum):
        return str(t.value)
    return _quote(t.tag) + "(" + ", ".join(show_term(a) for a in t.args) + ")"


def _outs(outs) -> str:
    return "(" + ", ".join(outs) + ")"


def format_core(prog: CoreProgram) -> str:
    lines = [CORE_HEADER]
    if prog.entry:
        lines.append(f"entry {prog.entry}")
    for p in prog.procedures:
        lines.append(f"proc {p.name}" + _outs(p.ins) + " -> " + _outs(p.outs))
        for g in p.groups:
            lines.append("  group")
            for r in g:
                lines.append("    rule" + (f" {r.label}" if r.label else ""))
                for v, pat in r.matches:
                    lines.append(f"      match {v} = {show_term(pat)}")
                for op, a, b in r.guards:
                    lines.append(f"      guard {op} {show_term(a)} {show_term(b)}")
                for v, t in r.binds:
                    lines.append(f"      bind {v} = {show_term(t)}")
                for c in r.calls:
                    lines.append(
                        f"      call {c.name}(" + ", ".join(show_term(a) for a in c.ins) + ") -> " + _outs(c.outs)
                    )
        lines.append("end")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(r"\s*(?:(?P<q>'(?:\\.|[^'\\])*')|(?P<n>-?\d+)|(?P<id>@?[A-Za-z_%][\w%']*)|(?P<p>->|>=|=<|<=|==|!=|[(),=<>]))")


class CoreSyntaxError(ValueError):
    pass


def _lex(line: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    line = line.rstrip()
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            raise CoreSyntaxError(f"bad core syntax near {line[pos:]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class _Cursor:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, text=None):
        k, v = self.peek()
        if k is None or (text is not None and v != text):
            raise CoreSyntaxError(f"expected {text!r}, got {v!r}")
        self.i += 1
        return k, v

    def term(self) -> CTerm:
        k, v = self.take()
        if k == "n":
            return CNum(int(v))
        if k == "id":
            return CVar(v[1:], True) if v.startswith("@") else CVar(v)
        if k == "q":
            name = _unquote(v)
            if self.peek()[1] == "(":
                self.take("(")
                args = []
                while self.peek()[1] != ")":
                    args.append(self.term())
                    if self.peek()[1] == ",":
                        self.take(",")
                self.take(")")
                return CTuple(name, tuple(args))
            return CConst(name)
        raise CoreSyntaxError(f"unexpected {v!r}")

    def names(self) -> list[str]:
        self.take("(")
        out = []
        while self.peek()[1] != ")":
            out.append(self.take()[1])
            if self.peek()[1] == ",":
                self.take(",")
        self.take(")")
        return out


def parse_core(text: str) -> CoreProgram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CORE_HEADER:
        raise CoreSyntaxError("missing core header line")
    prog = CoreProgram()
    proc: CoreProc | None = None
    rule: CoreRule | None = None
    for ln in lines[1:]:
        words = ln.split(None, 1)
        head = words[0]
        rest = words[1] if len(words) > 1 else ""
        if head == "entry":
            prog.entry = rest.strip()
        elif head == "proc":
            c = _Cursor(_lex(rest))
            name = c.take()[1]
            ins = c.names()
            c.take("->")
            outs = c.names()
            proc = CoreProc(name, ins, outs, [])
            prog.procedures.append(proc)
        elif head == "group":
            assert proc is not None
            proc.groups.append([])
        elif head == "rule":
            assert proc is not None
            rule = CoreRule(label=rest.strip())
            proc.groups[-1].append(rule)
        elif head == "end":
            proc = rule = None
        elif head in ("match", "bind"):
            assert rule is not None
            c = _Cursor(_lex(rest))
            v = c.take()[1]
            c.take("=")
            t = c.term()
            (rule.matches if head == "match" else rule.binds).append((v, t))
        elif head == "guard":
            assert rule is not None
            c = _Cursor(_lex(rest))
            op = c.take()[1]
            rule.guards.append((op, c.term(), c.term()))
        elif head == "call":
            assert rule is not None
            c = _Cursor(_lex(rest))
            name = c.take()[1]
            c.take("(")
            ins = []
            while c.peek()[1] != ")":
                ins.append(c.term())
                if c.peek()[1] == ",":
                    c.take(",")
            c.take(")")
            c.take("->")
            rule.calls.append(CoreCall(name, tuple(ins), tuple(c.names())))
        else:
            raise CoreSyntaxError(f"unknown core line {ln!r}")
    return prog
