"""Recursive descent parser producing a :class:`SurfaceProgram`.

Grammar sketch::

    program  := decl*
    decl     := '#' name '(' params ')' ['[' params ']'] outspec
                ( '==' stmts ';' | '=' stmts body | body )
    outspec  := arrow '(' names ')' | arrow name | '<' | '~' | <empty>
    body     := '{' rules {':' rules} '}'
    rule     := [lhsitem {',' lhsitem}] bars rhs
    rhs      := [stmt {',' stmt}] [ifthenelse | sequence | body]

Relational operators and the ``<=``/``>=``/``==`` forms are assembled from
adjacent single-character tokens so that ``<==>`` in ``#square(x)<==>x*x``
splits as ``<``, ``==``, ``>``.
"""

from __future__ import annotations

from . import ast as A
from .errors import DuplicateProcedure, MultipleAnonymousReturns, ParseError
from .lexer import ARROW, ATOM, BAR, CAP, END, IDENT, LARROW, NUMBER, Token, tokenize

RELOPS = (">=", "=<", "<=", "==", "!=", ">", "<")


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # ------------------------------------------------------------ utilities

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.tok
        if t.kind != END:
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.is_(text)

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"unexpected {self.describe(self.tok)}", (repr(text),))
        return self.next()

    def error(self, message: str, expected: tuple[str, ...] = ()) -> None:
        raise ParseError(message, self.tok.span, expected)

    @staticmethod
    def describe(t: Token) -> str:
        if t.kind == END:
            return "end of input"
        if t.kind == BAR:
            return f"bar run {t.text!r}"
        return repr(t.text)

    def adjacent(self, k: int = 1) -> bool:
        """True when token pos+k starts exactly where token pos+k-1 ends."""
        a, b = self.peek(k - 1), self.peek(k)
        return a.end == b.offset

    def at_name(self) -> bool:
        return self.tok.kind in (IDENT, CAP)

    def name(self) -> str:
        if not self.at_name():
            self.error(f"unexpected {self.describe(self.tok)}", ("name",))
        return self.next().text

    def at_op(self, op: str) -> bool:
        """Match a possibly multi-character operator made of adjacent tokens."""
        for i, ch in enumerate(op):
            t = self.peek(i)
            if not t.is_(ch):
                return False
            if i and not self.adjacent(i):
                return False
        # do not let '>' match the front of '>='
        nxt = self.peek(len(op))
        if op in (">", "<", "=") and nxt.is_("=") and self.adjacent(len(op)):
            return False
        return True

    def take_op(self, op: str) -> None:
        for _ in op:
            self.next()

    def at_become(self) -> bool:
        """``<=`` not followed by a third ``=`` (``<==`` is ``<`` then ``==``)."""
        return self.at_op("<=") and not (self.peek(2).is_("=") and self.adjacent(2))

    def relop(self) -> str | None:
        for op in RELOPS:
            if self.at_op(op):
                return op
        return None

    # -------------------------------------------------------------- program

    def program(self) -> A.SurfaceProgram:
        decls: list[A.ProcDecl] = []
        seen: set[str] = set()
        while self.tok.kind != END:
            d = self.decl()
            if d.header.name in seen:
                raise DuplicateProcedure(f"duplicate procedure {d.header.name}", d.span)
            seen.add(d.header.name)
            decls.append(d)
        return A.SurfaceProgram(decls)

    def decl(self) -> A.ProcDecl:
        start = self.expect("#").span
        header = self.header()
        if self.at_op("=="):
            self.take_op("==")
            stmts = self.stmt_list()
            self.expect(";")
            return A.ProcDecl(header, macro=stmts, span=start)
        init = None
        if self.accept("="):
            init = self.stmt_list()
        groups = self.body()
        return A.ProcDecl(header, init=init, groups=groups, span=start)

    def header(self) -> A.Header:
        span = self.tok.span
        name = self.name()
        self.expect("(")
        inputs = self.params(")")
        curried: list[A.Param] = []
        if self.accept("["):
            curried = self.params("]")
        outputs: list[A.Param] = []
        anon = None
        if self.tok.kind == ARROW:
            self.next()
            if self.accept("("):
                while not self.at(")"):
                    t = self.tok
                    outputs.append(A.Param(self.name(), span=t.span))
                    if not self.accept(","):
                        break
                self.expect(")")
            else:
                t = self.tok
                outputs.append(A.Param(self.name(), span=t.span))
        elif self.at("<") and not self.at_become():
            self.next()
            anon = "<"
        elif self.at("~"):
            self.next()
            anon = "~"
        if (self.at("<") and not self.at_become()) or self.at("~"):
            raise MultipleAnonymousReturns("header mixes anonymous and named outputs", self.tok.span)
        return A.Header(name, inputs, curried, outputs, anon, span)

    def params(self, close: str) -> list[A.Param]:
        ps: list[A.Param] = []
        while not self.at(close):
            t = self.tok
            pname = self.name()
            default = None
            if self.tok.kind == LARROW:
                self.next()
                default = self.expr()
            ps.append(A.Param(pname, default, t.span))
            self.accept(",")
        self.expect(close)
        return ps

    def body(self) -> list[list[A.Rule]]:
        self.expect("{")
        groups: list[list[A.Rule]] = [[]]
        while True:
            if self.accept("}"):
                break
            if self.accept(":"):
                groups.append([])
                continue
            rule, open_end = self.rule()
            groups[-1].append(rule)
            if self.accept(";"):
                continue
            if self.at(":") or self.at("}") or not open_end:
                if not (self.at(":") or self.at("}")):
                    self.error(f"unexpected {self.describe(self.tok)}", ("';'", "':'", "'}'"))
                continue
        if groups and not groups[-1] and len(groups) > 1:
            groups.pop()
        return groups

    # ---------------------------------------------------------------- rules

    def rule(self) -> tuple[A.Rule, bool]:
        span = self.tok.span
        lhs: list[A.LhsItem] = []
        if self.tok.kind != BAR:
            while True:
                lhs.append(self.lhs_item())
                if self.accept(","):
                    continue
                break
        if self.tok.kind != BAR:
            self.error(f"unexpected {self.describe(self.tok)}", ("','", "'|'"))
        bars = self.next().count
        anon = sum(1 for it in lhs if isinstance(it, A.ChannelGet) for _, p in it.items if isinstance(p, A.Msg) and p.anon)
        if anon > 1:
            raise MultipleAnonymousReturns("more than one anonymous return on a left hand side", span)
        rhs, body, nested = self.rhs()
        rule = A.Rule(lhs, bars, rhs, body, span)
        return rule, nested

    def rhs(self) -> tuple[list[A.Statement], list[list[A.Rule]] | None, bool]:
        """Statements plus optional trailing embedded body.  The flag reports
        whether the rhs ended in a nested construct (no ';' required)."""
        stmts: list[A.Statement] = []
        if self.stmt_start():
            while True:
                if self.at("?"):
                    break
                stmts.append(self.statement())
                if isinstance(stmts[-1], (A.IfThenElse, A.Sequence)):
                    return stmts, None, True
                if self.accept(","):
                    continue
                break
        if self.at("?"):
            stmts.append(self.if_then_else())
            return stmts, None, True
        if self.at("{"):
            return stmts, self.body(), True
        return stmts, None, False

    def stmt_start(self) -> bool:
        t = self.tok
        if t.kind == END or t.kind == BAR:
            return False
        return not (t.is_(";") or t.is_(":") or t.is_("}") or t.is_("{"))

    def stmt_list(self) -> list[A.Statement]:
        stmts = [self.statement()]
        while self.accept(","):
            stmts.append(self.statement())
        return stmts

    # ------------------------------------------------------------ lhs items

    def lhs_item(self) -> A.LhsItem:
        t = self.tok
        span = t.span
        if t.is_("?"):
            self.next()
            v = self.tok
            return A.ChannelGet(None, [("?", A.Var(self.name(), v.span))], None, span)
        if t.is_("("):
            return A.ChannelGet(None, [(".", self.msg_pattern())], None, span)
        if self.at_name():
            nxt = self.peek()
            if nxt.is_("$"):
                self.next()
                self.next()
                return A.Close(t.text, span)
            if nxt.is_("=") and not self.peek(2).is_("=") and not self.peek(2).is_("<"):
                self.next()
                self.next()
                return A.Match(t.text, self.term(top=True, pattern=True), span)
            if nxt.is_(".") or nxt.is_("?") or nxt.is_("/"):
                self.next()
                return self.channel_get(t.text, span)
            if t.kind == IDENT and (
                (nxt.is_("(") and self.adjacent(1))
                or nxt.is_("-")
                or nxt.kind == ARROW
                or nxt.is_(",")
                or nxt.kind == BAR
            ):
                return A.ChannelGet(None, [(".", self.msg_pattern())], None, span)
        left = self.additive()
        op = self.relop()
        if op is None:
            self.error(f"unexpected {self.describe(self.tok)}", ("relational operator",))
        self.take_op(op)
        right = self.additive()
        return A.Guard(op, left, right, span)

    def channel_get(self, name: str, span) -> A.LhsItem:
        items: list[tuple[str, A.Expr]] = []
        lookahead = None
        handle = A.is_handle_name(name)
        while True:
            if self.at("/"):
                self.next()
                if lookahead is None:
                    lookahead = len(items)
                continue
            if self.at("."):
                self.next()
                if self.at("$"):
                    if items:
                        self.error("'$' must stand alone after a channel name")
                    self.next()
                    return A.Close(name, span)
                if handle:
                    items.append((".", self.msg_pattern()))
                else:
                    items.append((".", self.term(top=True, pattern=True)))
                continue
            if self.at("?"):
                self.next()
                v = self.tok
                items.append(("?", A.Var(self.name(), v.span)))
                continue
            break
        if not items:
            self.error("empty channel pattern", ("'.'", "'?'"))
        return A.ChannelGet(name, items, lookahead, span)

    def msg_pattern(self) -> A.Msg:
        span = self.tok.span
        mname = ""
        if self.at_name():
            mname = self.next().text
        args: list[A.Expr] = []
        if self.at("(") and (mname == "" or self.adjacent(0) or True):
            self.next()
            while not self.at(")"):
                args.append(self.term(top=False, pattern=True))
                if not self.accept(","):
                    break
            self.expect(")")
        outs: list[str] = []
        anon = False
        if self.at("-") and self.peek().kind == BAR:
            self.next()
            anon = True
        elif self.tok.kind == ARROW:
            self.next()
            outs = self.out_names()
        return A.Msg(mname, args, outs, anon, span)

    def out_names(self) -> list[str]:
        if self.accept("("):
            outs = []
            while not self.at(")"):
                outs.append(self.name())
                if not self.accept(","):
                    break
            self.expect(")")
            return outs
        return [self.name()]

    # ---------------------------------------------------------------- terms

    def term(self, top: bool, pattern: bool) -> A.Expr:
        """A tuple/constant term.  A bare lowercase name at the top is a
        constant; nested names are futures."""
        head = self.term_prim(top, pattern)
        # a ':' opening a line is the otherwise separator, not a cons
        if self.at(":") and self.tok.span.line == self.toks[self.pos - 1].span.line:
            nxt = self.peek()
            if nxt.kind in (IDENT, CAP, NUMBER, ATOM) or nxt.is_("$") or nxt.is_("(") or nxt.is_("-"):
                span = self.next().span
                tail = self.term(top=False, pattern=pattern)
                return A.Tup(":", [head, tail], span)
        return head

    def term_prim(self, top: bool, pattern: bool) -> A.Expr:
        t = self.tok
        if t.kind == NUMBER:
            self.next()
            return A.Num(int(t.text), t.span)
        if t.is_("-") and self.peek().kind == NUMBER:
            self.next()
            n = self.next()
            return A.Num(-int(n.text), t.span)
        if t.is_("$"):
            self.next()
            return A.Const("$", t.span)
        if t.kind == ATOM:
            self.next()
            return A.Const(t.text, t.span)
        if t.kind in (IDENT, CAP):
            if self.peek().is_("(") and self.adjacent(1):
                self.next()
                self.next()
                args: list[A.Expr] = []
                while not self.at(")"):
                    args.append(self.term(False, True) if pattern else self.expr())
                    if not self.accept(","):
                        break
                self.expect(")")
                return A.Tup(t.text, args, t.span)
            self.next()
            if t.kind == CAP or not top:
                return A.Var(t.text, t.span)
            return A.Const(t.text, t.span)
        if t.is_("(") and not pattern:
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected {self.describe(t)}", ("term",))
        raise AssertionError

    # ----------------------------------------------------------- statements

    def statement(self) -> A.Statement:
        t = self.tok
        span = t.span
        if self.at_become():
            self.take_op("<=")
            return A.Become(self.expr(), span)
        if t.is_("<") and self.peek().is_("("):
            self.next()
            self.next()
            names = []
            while not self.at(")"):
                names.append(self.name())
                if not self.accept(","):
                    break
            self.expect(")")
            return A.LocalDecl(names, span)
        if t.is_(">"):
            self.next()
            if self.at("=") and self.adjacent(0):
                self.next()
                return A.AnonReturn(self.term(top=True, pattern=False), True, span)
            return A.AnonReturn(self.expr(), False, span)
        if t.is_("?"):
            return self.if_then_else()
        if t.is_("+"):
            return self.sequence()
        if self.at_name():
            nxt = self.peek()
            if nxt.is_("=") and not self.peek(2).is_("="):
                self.next()
                self.next()
                return A.Bind(t.text, self.term(top=True, pattern=False), span)
            if nxt.kind == LARROW:
                self.next()
                self.next()
                return A.Alias(t.text, self.expr(), span)
            if nxt.is_(".") or nxt.is_("^") or nxt.is_("$"):
                self.next()
                return self.channel_put(t.text, span)
        if t.is_("~") and self.peek().kind == IDENT:
            self.next()
            msgs = [self.send_msg(with_outs=True)]
            while self.accept("."):
                msgs.append(self.send_msg(with_outs=True))
            return A.ChannelPut("~", [(".", m) for m in msgs], False, span)
        e = self.expr(with_outs=True)
        outs: list[str] = []
        if self.tok.kind == ARROW:
            self.next()
            outs = self.out_names()
        if not isinstance(e, (A.Call, A.DotSend, A.TildeChain, A.Juxt)) and not outs:
            raise ParseError("expression is not a statement", span)
        return A.ProcessCall(e, outs, span)

    def channel_put(self, name: str, span) -> A.ChannelPut:
        items: list[tuple[str, A.Expr]] = []
        handle = A.is_handle_name(name)
        while True:
            if self.at("$"):
                self.next()
                return A.ChannelPut(name, items, True, span)
            if self.at("."):
                self.next()
                if handle:
                    items.append((".", self.send_msg(with_outs=True)))
                else:
                    items.append((".", self.term(top=True, pattern=False)))
                continue
            if self.at("^"):
                self.next()
                items.append(("^", self.additive()))
                continue
            break
        if self.tok.kind == ARROW and items and isinstance(items[-1][1], A.Msg):
            self.next()
            items[-1][1].outs = self.out_names()
        return A.ChannelPut(name, items, False, span)

    def send_msg(self, with_outs: bool) -> A.Msg:
        span = self.tok.span
        mname = ""
        if self.at_name():
            mname = self.next().text
        args: list[A.Expr] = []
        if self.at("(") and (mname == "" or self.adjacent(0)):
            self.next()
            args = self.call_args()
        outs: list[str] = []
        if with_outs and self.tok.kind == ARROW and self.peek().kind in (IDENT, CAP) and self.peek(2).is_("."):
            # chained form  T.a->X.b->Y : the output binds to this message
            self.next()
            outs = [self.name()]
        return A.Msg(mname, args, outs, False, span)

    def if_then_else(self) -> A.IfThenElse:
        span = self.expect("?").span
        cond = self.cond_expr()
        self.expect(":")
        then = self.branch()
        self.expect(";")
        self.expect(":")
        else_ = self.branch()
        return A.IfThenElse(cond, then, else_, span)

    def sequence(self) -> A.Sequence:
        span = self.expect("+").span
        first = self.stmt_list() if self.stmt_start() else []
        self.expect(";")
        return A.Sequence(first, self.branch(), span)

    def branch(self) -> A.Branch:
        bars = None
        if self.tok.kind == BAR:
            bars = self.next().count
        stmts, body, _ = self.rhs()
        return A.Branch(bars, stmts, body)

    # ---------------------------------------------------------- expressions

    def cond_expr(self) -> A.Expr:
        left = self.additive()
        op = self.relop()
        if op is None:
            return left
        span = self.tok.span
        self.take_op(op)
        return A.BinOp(op, left, self.additive(), span)

    def expr(self, with_outs: bool = False) -> A.Expr:
        return self.additive(with_outs)

    def additive(self, with_outs: bool = False) -> A.Expr:
        left = self.multiplicative(with_outs)
        while (self.at("+") or self.at("-")) and not (self.at("-") and self.peek().kind == BAR):
            op = self.next()
            left = A.BinOp(op.text, left, self.multiplicative(with_outs), op.span)
        return left

    def multiplicative(self, with_outs: bool = False) -> A.Expr:
        left = self.juxtaposition(with_outs)
        while self.at("*") or self.at("/"):
            op = self.next()
            left = A.BinOp(op.text, left, self.juxtaposition(with_outs), op.span)
        return left

    def primary_start(self) -> bool:
        t = self.tok
        return t.kind in (IDENT, CAP, NUMBER, ATOM) or t.is_("(")

    def juxtaposition(self, with_outs: bool = False) -> A.Expr:
        left = self.postfix(with_outs)
        while self.primary_start():
            span = self.tok.span
            left = A.Juxt(left, self.postfix(with_outs), span)
        return left

    def postfix(self, with_outs: bool = False) -> A.Expr:
        e = self.primary()
        chain = None  # a chain built in this loop; parenthesized ones stay closed
        while True:
            if self.at(".") and (self.peek().kind == IDENT or self.peek().is_("(")):
                span = self.next().span
                msg = self.send_msg(with_outs)
                if isinstance(chain, A.DotSend):
                    chain.msgs.append(msg)
                else:
                    e = chain = A.DotSend(e, [msg], span)
                continue
            if self.at("~") and (self.peek().kind == IDENT or self.peek().is_("(")):
                span = self.next().span
                msg = self.send_msg(False)
                if isinstance(chain, A.TildeChain):
                    chain.msgs.append(msg)
                else:
                    e = chain = A.TildeChain(e, [msg], span)
                continue
            return e

    def call_args(self) -> list[A.Expr]:
        args: list[A.Expr] = []
        while not self.at(")"):
            t = self.tok
            if self.at_name() and self.peek().kind == LARROW:
                self.next()
                self.next()
                args.append(A.NamedArg(t.text, self.expr(), t.span))
            else:
                args.append(self.expr())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == NUMBER:
            self.next()
            return A.Num(int(t.text), t.span)
        if t.is_("-") and self.peek().kind == NUMBER:
            self.next()
            n = self.next()
            return A.Num(-int(n.text), t.span)
        if t.kind == ATOM:
            self.next()
            return A.Const(t.text, t.span)
        if t.kind in (IDENT, CAP):
            self.next()
            if self.at("(") and self.adjacent(0):
                self.next()
                return A.Call(t.text, self.call_args(), t.span)
            return A.Var(t.text, t.span)
        if t.is_("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.is_("~"):
            self.next()
            if self.tok.kind == IDENT and self.adjacent(0):
                msg = self.send_msg(False)
                return A.DotSend(A.AnonSelf("~", t.span), [msg], t.span)
            return A.AnonSelf("~", t.span)
        if t.is_("<") and not self.peek().is_("("):
            self.next()
            return A.AnonSelf("<", t.span)
        if t.is_("$"):
            self.next()
            return A.Const("$", t.span)
        self.error(f"unexpected {self.describe(t)}", ("expression",))
        raise AssertionError


def parse_program(tokens: list[Token]) -> A.SurfaceProgram:
    return Parser(tokens).program()


def parse(source: str) -> A.SurfaceProgram:
    return parse_program(tokenize(source))
