"""Lexer and recursive-descent parser for `.pr` source files.

Surface syntax (one statement per construct, blocks closed by keywords)::

    def getBetween(l : [Char] with (i, j)) : [Char] :=
        for (k, c) in enumerate(l) do
            if i <= k and k <= j then yield c endif
        done

`let` binders scope over the rest of the enclosing block.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import hl_ast as A
from .errors import ParseError, TypeCheckError

KEYWORDS = {
    "def", "with", "for", "in", "enumerate", "reversed", "do", "done", "if",
    "then", "else", "endif", "let", "mut", "yield", "return", "True", "False",
    "and", "or", "not", "skip", "begin", "end", "while", "Bool", "Char",
    "gen", "bgen",
}

SYMBOLS = [
    ":=", "===", "!==", "<=>", "=>", "==", "!=", "<=", ">=", "<", ">",
    "(", ")", "[", "]", ",", ":", "{", "}",
]

ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"', "s": " "}


@dataclass(frozen=True)
class Token:
    kind: str  # ident, kw, sym, char, string, int, eof
    value: str
    span: A.Span


_ws = re.compile(r"[ \t\r]+")
_ident = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_int = re.compile(r"[0-9]+")


def _read_escaped(text: str, i: int, quote: str, span: A.Span) -> tuple[str, int]:
    out = []
    while True:
        if i >= len(text) or text[i] == "\n":
            raise ParseError("unterminated literal", span)
        ch = text[i]
        if ch == quote:
            return "".join(out), i + 1
        if ch == "\\":
            if i + 1 >= len(text):
                raise ParseError("dangling escape", span)
            nxt = text[i + 1]
            if nxt == "u":
                m = re.match(r"u\{([0-9a-fA-F]+)\}", text[i + 1:])
                if not m:
                    raise ParseError("bad unicode escape", span)
                out.append(chr(int(m.group(1), 16)))
                i += 1 + m.end()
                continue
            if nxt not in ESCAPES:
                raise ParseError(f"unknown escape \\{nxt}", span)
            out.append(ESCAPES[nxt])
            i += 2
            continue
        out.append(ch)
        i += 1


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col0 = 0, 1, 0
    while i < len(text):
        ch = text[i]
        span = A.Span(line, i - col0 + 1)
        if ch == "\n":
            line += 1
            i += 1
            col0 = i
            continue
        m = _ws.match(text, i)
        if m:
            i = m.end()
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch == "'":
            val, i = _read_escaped(text, i + 1, "'", span)
            if len(val) != 1:
                raise ParseError("character literal must hold exactly one character", span)
            toks.append(Token("char", val, span))
            continue
        if ch == '"':
            val, i = _read_escaped(text, i + 1, '"', span)
            toks.append(Token("string", val, span))
            continue
        m = _ident.match(text, i)
        if m:
            word = m.group(0)
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, span))
            i = m.end()
            continue
        m = _int.match(text, i)
        if m:
            toks.append(Token("int", m.group(0), span))
            i = m.end()
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, span))
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", span)
    toks.append(Token("eof", "", A.Span(line, i - col0 + 1)))
    return toks


BLOCK_END = {"done", "else", "endif", "end", "def", "}"}
CMP_OPS = {"===", "!==", "==", "!=", "<", "<=", ">", ">="}


class Parser:
    def __init__(self, text: str, internal: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.internal = internal
        self.ret_is_bool = False

    # -- token plumbing
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.value == value

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"unexpected {self.describe(self.tok)}", [repr(value)])
        return self.advance()

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.fail(f"unexpected {self.describe(t)}", ["identifier"])
        if t.value.startswith("__") and not self.internal:
            raise ParseError(f"identifier {t.value!r} uses the reserved '__' prefix", t.span)
        self.advance()
        return t.value

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.value)

    def fail(self, message: str, expected=()):
        raise ParseError(message, self.tok.span, expected)

    # -- program level
    def program(self) -> A.Program:
        if self.tok.kind == "eof":
            self.fail("expected function definition")
        funs = []
        while self.tok.kind != "eof":
            if not self.at("def"):
                self.fail(f"unexpected {self.describe(self.tok)}", ["'def'"])
            funs.append(self.function())
        names = [f.name for f in funs]
        main = "main" if "main" in names else names[-1]
        return A.Program(tuple(funs), main, span=funs[0].span)

    def function(self) -> A.Function:
        span = self.expect("def").span
        name = self.ident()
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.advance()
                params.append(self.param())
        self.expect(")")
        self.expect(":")
        ret = self.type_()
        self.expect(":=")
        self.ret_is_bool = isinstance(ret, A.TBool)
        body = self.block()
        return A.Function(name, tuple(params), ret, body, span=span)

    def param(self) -> A.Param:
        span = self.tok.span
        name = self.ident()
        self.expect(":")
        ty = self.type_()
        positions: tuple[str, ...] = ()
        if self.at("with"):
            self.advance()
            positions = self.ident_tuple()
        return A.Param(name, ty, positions, span=span)

    def ident_tuple(self) -> tuple[str, ...]:
        self.expect("(")
        out = [self.ident()]
        while self.at(","):
            self.advance()
            out.append(self.ident())
        self.expect(")")
        return tuple(out)

    def type_(self):
        if self.at("Bool"):
            self.advance()
            return A.TBool()
        if self.at("Char"):
            self.advance()
            return A.TOut(0)
        if self.at("["):
            self.advance()
            inner = self.type_()
            self.expect("]")
            if isinstance(inner, A.TBool):
                self.fail("lists of booleans are not supported")
            return A.TOut(inner.depth + 1)
        self.fail(f"unexpected {self.describe(self.tok)}", ["type"])

    # -- statements
    def block(self) -> A.Stmt:
        stmts: list[A.Stmt] = []
        while not (self.tok.kind == "eof" or (self.tok.kind in ("kw", "sym") and self.tok.value in BLOCK_END)):
            if self.at("let"):
                stmts.append(self.let())
                break
            stmts.append(self.stmt())
        return A.seq(*stmts) if len(stmts) != 1 else stmts[0]

    def let(self) -> A.Stmt:
        span = self.expect("let").span
        if self.at("mut"):
            self.advance()
            name = self.ident()
            self.expect(":=")
            if self.at("True"):
                raise TypeCheckError("BooleanReset", f"boolean {name!r} must start as False", self.tok.span)
            self.expect("False")
            self.expect("in")
            return A.LetBool(name, self.block(), span=span)
        name = self.ident()
        self.expect(":=")
        expr = self.oexpr()
        self.expect("in")
        return A.LetOut(name, expr, self.block(), span=span)

    def stmt(self) -> A.Stmt:
        t = self.tok
        span = t.span
        if self.at("while"):
            raise TypeCheckError("WhileOrRecursion", "while loops are not part of the language", span)
        if self.at("for"):
            self.advance()
            self.expect("(")
            pos = self.ident()
            self.expect(",")
            elem = self.ident()
            self.expect(")")
            self.expect("in")
            backward = False
            if self.at("reversed"):
                self.advance()
                self.expect("(")
                backward = True
            self.expect("enumerate")
            self.expect("(")
            it = self.oexpr()
            self.expect(")")
            if backward:
                self.expect(")")
            self.expect("do")
            body = self.block()
            self.expect("done")
            return A.For(pos, elem, it, body, backward, span=span)
        if self.at("if"):
            self.advance()
            cond = self.bexpr()
            self.expect("then")
            then = self.block()
            els: A.Stmt = A.Skip()
            if self.at("else"):
                self.advance()
                els = self.block()
            self.expect("endif")
            return A.If(cond, then, els, span=span)
        if self.at("yield"):
            self.advance()
            return A.Yield(self.oexpr(), span=span)
        if self.at("return"):
            self.advance()
            expr = self.bexpr() if self.ret_is_bool else self.oexpr()
            return A.Return(expr, span=span)
        if self.at("skip"):
            self.advance()
            return A.Skip(span=span)
        if self.at("begin"):
            self.advance()
            body = self.block()
            self.expect("end")
            # keep explicit grouping visible when it matters for scoping
            return body
        if t.kind == "ident" and self.peek().kind == "sym" and self.peek().value == ":=":
            name = self.ident()
            self.advance()
            if self.at("True"):
                self.advance()
                return A.SetTrue(name, span=span)
            if self.at("False"):
                self.advance()
                return A.Assign(name, False, span=span)
            return A.Assign(name, self.oexpr(), span=span)
        self.fail(f"unexpected {self.describe(t)}", ["statement"])

    # -- list expressions
    def oexpr(self) -> A.OExpr:
        t = self.tok
        span = t.span
        if t.kind == "char":
            self.advance()
            return A.Const(A.CChar(t.value), span=span)
        if t.kind == "string":
            self.advance()
            return A.Const(A.clist_of_string(t.value), span=span)
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                items.append(self.oexpr())
                while self.at(","):
                    self.advance()
                    items.append(self.oexpr())
            self.expect("]")
            if all(isinstance(x, A.Const) for x in items):
                return A.Const(A.CList(tuple(x.value for x in items)), span=span)
            return A.OList(tuple(items), span=span)
        if self.internal and self.at("gen"):
            self.advance()
            self.expect("[")
            depth = int(self.advance().value)
            self.expect("]")
            self.expect("{")
            saved, self.ret_is_bool = self.ret_is_bool, False
            body = self.block()
            self.ret_is_bool = saved
            self.expect("}")
            return A.ListGen(body, depth, span=span)
        if t.kind == "ident":
            name = self.ident()
            if self.at("("):
                return A.Call(name, self.args(), span=span)
            return A.Var(name, span=span)
        self.fail(f"unexpected {self.describe(t)}", ["list expression"])

    def args(self) -> tuple[A.Arg, ...]:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.arg())
            while self.at(","):
                self.advance()
                out.append(self.arg())
        self.expect(")")
        return tuple(out)

    def arg(self) -> A.Arg:
        span = self.tok.span
        e = self.oexpr()
        positions: tuple[str, ...] = ()
        if self.at("with"):
            self.advance()
            positions = self.ident_tuple()
        return A.Arg(e, positions, span=span)

    # -- boolean expressions
    def bexpr(self) -> A.BExpr:
        left = self.b_or()
        if self.at("=>") or self.at("<=>"):
            op = self.advance()
            right = self.bexpr()
            return A.BBin(op.value, left, right, span=op.span)
        return left

    def b_or(self) -> A.BExpr:
        left = self.b_and()
        while self.at("or"):
            op = self.advance()
            left = A.BBin("or", left, self.b_and(), span=op.span)
        return left

    def b_and(self) -> A.BExpr:
        left = self.b_not()
        while self.at("and"):
            op = self.advance()
            left = A.BBin("and", left, self.b_not(), span=op.span)
        return left

    def b_not(self) -> A.BExpr:
        if self.at("not"):
            t = self.advance()
            return A.BNot(self.b_not(), span=t.span)
        return self.b_atom()

    def b_atom(self) -> A.BExpr:
        t = self.tok
        span = t.span
        if self.at("True") or self.at("False"):
            self.advance()
            return A.BConst(t.value == "True", span=span)
        if self.at("("):
            self.advance()
            e = self.bexpr()
            self.expect(")")
            return e
        if self.internal and self.at("bgen"):
            self.advance()
            self.expect("{")
            saved, self.ret_is_bool = self.ret_is_bool, True
            body = self.block()
            self.ret_is_bool = saved
            self.expect("}")
            return A.BoolGen(body, span=span)
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "sym" and nxt.value == "(":
                left = self.oexpr()
                if not self.cmp_ahead():
                    return A.BCall(left.fname, left.args, span=span)
                return self.comparison(left)
            if self.cmp_ahead(1):
                return self.comparison(self.oexpr())
            return A.BVar(self.ident(), span=span)
        if t.kind in ("char", "string") or self.at("[") or (self.internal and self.at("gen")):
            return self.comparison(self.oexpr())
        self.fail(f"unexpected {self.describe(t)}", ["boolean expression"])

    def cmp_ahead(self, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "sym" and t.value in CMP_OPS

    def comparison(self, left: A.OExpr) -> A.BExpr:
        if not self.cmp_ahead():
            self.fail(f"unexpected {self.describe(self.tok)}", ["comparison operator"])
        op = self.advance()
        right = self.oexpr()
        if op.value in ("===", "!=="):
            e = A.LitEq(left, right, span=op.span)
            return A.BNot(e, span=op.span) if op.value == "!==" else e
        if isinstance(left, A.Var) and isinstance(right, A.Var):
            return A.PosCmp(op.value, left.name, right.name, span=op.span)
        if op.value in ("==", "!="):
            e = A.LitEq(left, right, span=op.span)
            return A.BNot(e, span=op.span) if op.value == "!=" else e
        raise ParseError(f"operator {op.value} compares positions only", op.span)


def parse_program(text: str, internal: bool = False) -> A.Program:
    """Parse `.pr` source text into a surface AST.

    With ``internal=True`` the reserved ``__`` prefix and generator syntax
    (``gen[n]{...}``, ``bgen{...}``) are accepted; this is how dumped
    intermediate programs are read back.
    """
    return Parser(text, internal).program()
