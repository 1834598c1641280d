"""Simple for-programs: AST, text format, interpreter and metrics.

A simple for-program reads a single input word.  Loops range over its
positions, booleans are declared at the top or at a loop head and can only
be switched on, and output is produced letter by letter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ParseError
from .parser import Token, tokenize
from .pretty import _esc


# ---------------------------------------------------------------- conditions


@dataclass(frozen=True)
class CConst:
    value: bool


@dataclass(frozen=True)
class CBool:
    name: str


@dataclass(frozen=True)
class CNot:
    arg: "Cond"


@dataclass(frozen=True)
class CBin:
    op: str  # "and" | "or"
    left: "Cond"
    right: "Cond"


@dataclass(frozen=True)
class CLabel:
    """``label(var) == char``"""

    var: str
    char: str


@dataclass(frozen=True)
class CPos:
    op: str  # one of == != < <= > >=
    left: str
    right: str


Cond = Union[CConst, CBool, CNot, CBin, CLabel, CPos]


def c_and(a: Cond, b: Cond) -> Cond:
    if a == CConst(True):
        return b
    if b == CConst(True):
        return a
    if CConst(False) in (a, b):
        return CConst(False)
    return CBin("and", a, b)


def c_or(a: Cond, b: Cond) -> Cond:
    if a == CConst(False):
        return b
    if b == CConst(False):
        return a
    if CConst(True) in (a, b):
        return CConst(True)
    return CBin("or", a, b)


def c_not(a: Cond) -> Cond:
    if isinstance(a, CConst):
        return CConst(not a.value)
    if isinstance(a, CNot):
        return a.arg
    return CNot(a)


# ---------------------------------------------------------------- statements


@dataclass(frozen=True)
class SFor:
    var: str
    backward: bool
    bools: tuple[str, ...]
    body: "SStmt"


@dataclass(frozen=True)
class SIf:
    cond: Cond
    then: "SStmt"
    els: "SStmt"


@dataclass(frozen=True)
class SSetTrue:
    name: str


@dataclass(frozen=True)
class SPrintLabel:
    var: str


@dataclass(frozen=True)
class SPrintChar:
    char: str


@dataclass(frozen=True)
class SSkip:
    pass


@dataclass(frozen=True)
class SSeq:
    stmts: tuple["SStmt", ...]


SStmt = Union[SFor, SIf, SSetTrue, SPrintLabel, SPrintChar, SSkip, SSeq]


def sseq(*stmts: SStmt) -> SStmt:
    flat: list[SStmt] = []
    for s in stmts:
        if isinstance(s, SSeq):
            flat.extend(s.stmts)
        elif not isinstance(s, SSkip):
            flat.append(s)
    if not flat:
        return SSkip()
    return flat[0] if len(flat) == 1 else SSeq(tuple(flat))


def sstmts(s: SStmt) -> tuple[SStmt, ...]:
    if isinstance(s, SSeq):
        return s.stmts
    return () if isinstance(s, SSkip) else (s,)


@dataclass(frozen=True)
class SimpleProgram:
    bools: tuple[str, ...]
    body: SStmt

    def prints(self) -> list[tuple[SStmt, tuple]]:
        """Print statements in source order with their path."""
        out: list = []

        def walk(s, path):
            if isinstance(s, (SPrintLabel, SPrintChar)):
                out.append((s, path))
            elif isinstance(s, SSeq):
                for k, x in enumerate(s.stmts):
                    walk(x, path + (k,))
            elif isinstance(s, SIf):
                walk(s.then, path + (0,))
                walk(s.els, path + (1,))
            elif isinstance(s, SFor):
                walk(s.body, path + (0,))

        walk(self.body, ())
        return out


# ---------------------------------------------------------------- printing


def show_cond(c: Cond) -> str:
    if isinstance(c, CConst):
        return "true" if c.value else "false"
    if isinstance(c, CBool):
        return c.name
    if isinstance(c, CNot):
        return f"not {_catom(c.arg)}"
    if isinstance(c, CBin):
        return f"{_catom(c.left)} {c.op} {_catom(c.right)}"
    if isinstance(c, CLabel):
        return f"label({c.var}) == '{_esc(c.char)}'"
    if isinstance(c, CPos):
        return f"{c.left} {c.op} {c.right}"
    raise TypeError(c)


def _catom(c: Cond) -> str:
    s = show_cond(c)
    return f"({s})" if isinstance(c, (CBin, CLabel, CPos)) else s


def show_sstmt(s: SStmt, level: int = 0) -> str:
    pad = "    " * level
    if isinstance(s, SSeq):
        return "\n".join(show_sstmt(x, level) for x in s.stmts)
    if isinstance(s, SSkip):
        return f"{pad}skip"
    if isinstance(s, SSetTrue):
        return f"{pad}{s.name} := true"
    if isinstance(s, SPrintLabel):
        return f"{pad}print label({s.var})"
    if isinstance(s, SPrintChar):
        return f"{pad}print '{_esc(s.char)}'"
    if isinstance(s, SIf):
        return "\n".join([
            f"{pad}if {show_cond(s.cond)} then",
            show_sstmt(s.then, level + 1),
            f"{pad}else",
            show_sstmt(s.els, level + 1),
            f"{pad}endif",
        ])
    if isinstance(s, SFor):
        src = "reversed(input)" if s.backward else "input"
        lines = [f"{pad}for {s.var} in {src} do"]
        if s.bools:
            lines.append(f"{pad}    let {', '.join(s.bools)} := false in")
        lines += [show_sstmt(s.body, level + 1), f"{pad}done"]
        return "\n".join(lines)
    raise TypeError(s)


def show_simple(sp: SimpleProgram) -> str:
    lines = []
    if sp.bools:
        lines.append(f"let {', '.join(sp.bools)} := false in")
    lines.append(show_sstmt(sp.body))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- parsing


class _SParser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, v: str) -> bool:
        return self.tok.kind != "eof" and self.tok.kind not in ("char", "string") and self.tok.value == v

    def expect(self, v: str) -> Token:
        if not self.at(v):
            raise ParseError(f"unexpected {self.tok.value!r}", self.tok.span, [repr(v)])
        t = self.tok
        self.i += 1
        return t

    def name(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise ParseError(f"unexpected {t.value!r}", t.span, ["identifier"])
        self.i += 1
        return t.value

    def decls(self) -> tuple[str, ...]:
        if not self.at("let"):
            return ()
        self.expect("let")
        names = [self.name()]
        while self.at(","):
            self.expect(",")
            names.append(self.name())
        self.expect(":=")
        self.expect("false")
        self.expect("in")
        return tuple(names)

    def program(self) -> SimpleProgram:
        bools = self.decls()
        body = self.block()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self.tok.value!r}", self.tok.span)
        return SimpleProgram(bools, body)

    def block(self) -> SStmt:
        out = []
        while self.tok.kind != "eof" and not any(self.at(k) for k in ("done", "else", "endif")):
            out.append(self.stmt())
        return sseq(*out)

    def stmt(self) -> SStmt:
        if self.at("skip"):
            self.i += 1
            return SSkip()
        if self.at("print"):
            self.i += 1
            if self.tok.kind == "char":
                c = self.tok.value
                self.i += 1
                return SPrintChar(c)
            self.expect("label")
            self.expect("(")
            v = self.name()
            self.expect(")")
            return SPrintLabel(v)
        if self.at("for"):
            self.i += 1
            v = self.name()
            self.expect("in")
            backward = False
            if self.at("reversed"):
                self.i += 1
                self.expect("(")
                self.expect("input")
                self.expect(")")
                backward = True
            else:
                self.expect("input")
            self.expect("do")
            bools = self.decls()
            body = self.block()
            self.expect("done")
            return SFor(v, backward, bools, body)
        if self.at("if"):
            self.i += 1
            c = self.cond()
            self.expect("then")
            t = self.block()
            e: SStmt = SSkip()
            if self.at("else"):
                self.i += 1
                e = self.block()
            self.expect("endif")
            return SIf(c, t, e)
        n = self.name()
        self.expect(":=")
        self.expect("true")
        return SSetTrue(n)

    def cond(self) -> Cond:
        left = self.c_and()
        while self.at("or"):
            self.i += 1
            left = CBin("or", left, self.c_and())
        return left

    def c_and(self) -> Cond:
        left = self.c_not()
        while self.at("and"):
            self.i += 1
            left = CBin("and", left, self.c_not())
        return left

    def c_not(self) -> Cond:
        if self.at("not"):
            self.i += 1
            return CNot(self.c_not())
        return self.c_atom()

    def c_atom(self) -> Cond:
        if self.at("("):
            self.i += 1
            c = self.cond()
            self.expect(")")
            return c
        if self.at("true") or self.at("false"):
            v = self.tok.value == "true"
            self.i += 1
            return CConst(v)
        if self.at("label"):
            self.i += 1
            self.expect("(")
            v = self.name()
            self.expect(")")
            self.expect("==")
            if self.tok.kind != "char":
                raise ParseError("expected a character", self.tok.span)
            c = self.tok.value
            self.i += 1
            return CLabel(v, c)
        n = self.name()
        t = self.tok
        if t.kind == "sym" and t.value in ("==", "!=", "<", "<=", ">", ">="):
            self.i += 1
            return CPos(t.value, n, self.name())
        return CBool(n)


def parse_simple(text: str) -> SimpleProgram:
    return _SParser(text).program()


# ---------------------------------------------------------------- semantics


_CMP = {
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def eval_cond(c: Cond, w: str, pos: dict, bools: dict) -> bool:
    t = type(c)
    if t is CBool:
        return bools[c.name]
    if t is CLabel:
        return w[pos[c.var]] == c.char
    if t is CPos:
        return _CMP[c.op](pos[c.left], pos[c.right])
    if t is CNot:
        return not eval_cond(c.arg, w, pos, bools)
    if t is CBin:
        if c.op == "and":
            return eval_cond(c.left, w, pos, bools) and eval_cond(c.right, w, pos, bools)
        return eval_cond(c.left, w, pos, bools) or eval_cond(c.right, w, pos, bools)
    return c.value


def _exec(s, w, pos, bools, out):
    t = type(s)
    if t is SSeq:
        for x in s.stmts:
            _exec(x, w, pos, bools, out)
    elif t is SFor:
        rng = range(len(w) - 1, -1, -1) if s.backward else range(len(w))
        for k in rng:
            pos[s.var] = k
            for b in s.bools:
                bools[b] = False
            _exec(s.body, w, pos, bools, out)
        pos.pop(s.var, None)
    elif t is SIf:
        _exec(s.then if eval_cond(s.cond, w, pos, bools) else s.els, w, pos, bools, out)
    elif t is SSetTrue:
        bools[s.name] = True
    elif t is SPrintLabel:
        out.append(w[pos[s.var]])
    elif t is SPrintChar:
        out.append(s.char)


def eval_simple(sp: SimpleProgram, w: str) -> str:
    """Run `sp` on the word `w` (backward loops visit |w|-1 down to 0)."""
    bools = {b: False for b in sp.bools}
    out: list[str] = []
    _exec(sp.body, w, {}, bools, out)
    return "".join(out)


def simple_letters(sp: SimpleProgram) -> set[str]:
    found: set[str] = set()

    def cw(c):
        if isinstance(c, CLabel):
            found.add(c.char)
        elif isinstance(c, CNot):
            cw(c.arg)
        elif isinstance(c, CBin):
            cw(c.left)
            cw(c.right)

    def sw(s):
        if isinstance(s, SSeq):
            for x in s.stmts:
                sw(x)
        elif isinstance(s, SIf):
            cw(s.cond)
            sw(s.then)
            sw(s.els)
        elif isinstance(s, SFor):
            sw(s.body)
        elif isinstance(s, SPrintChar):
            found.add(s.char)

    sw(sp.body)
    return found


# ---------------------------------------------------------------- metrics


@dataclass(frozen=True)
class Metrics:
    size: int
    loop_depth: int
    bool_depth: int


def simple_metrics(sp: SimpleProgram) -> Metrics:
    """size: If/For/SetTrue/Print/Skip nodes; depths: maxima over program points."""

    def go(s, loops, nb):
        if isinstance(s, SSeq):
            res = [go(x, loops, nb) for x in s.stmts]
            return (sum(r[0] for r in res), max([r[1] for r in res] + [loops]), max([r[2] for r in res] + [nb]))
        if isinstance(s, SFor):
            size, ld, bd = go(s.body, loops + 1, nb + len(s.bools))
            return (size + 1, max(ld, loops + 1), max(bd, nb + len(s.bools)))
        if isinstance(s, SIf):
            a = go(s.then, loops, nb)
            b = go(s.els, loops, nb)
            return (1 + a[0] + b[0], max(a[1], b[1]), max(a[2], b[2]))
        return (1, loops, nb)

    if isinstance(sp.body, SSkip) and not sp.bools:
        return Metrics(0, 0, 0)
    size, ld, bd = go(sp.body, 0, len(sp.bools))
    return Metrics(size, ld, bd)


def hl_metrics(p) -> Metrics:
    """The same counts for a high-level program, maximized over its functions.

    If/For/SetTrue/yield/return count towards size, mirroring the simple
    program convention (`let` binders are not statements there); `let`
    booleans count towards bool_depth inside their scope.
    """
    from . import hl_ast as A

    def go(s, loops, nb):
        if isinstance(s, A.Seq):
            res = [go(x, loops, nb) for x in s.stmts]
            return (sum(r[0] for r in res), max([r[1] for r in res] + [loops]), max([r[2] for r in res] + [nb]))
        if isinstance(s, A.For):
            size, ld, bd = go(s.body, loops + 1, nb)
            return (size + 1, max(ld, loops + 1), bd)
        if isinstance(s, A.If):
            a, b = go(s.then, loops, nb), go(s.els, loops, nb)
            return (1 + a[0] + b[0], max(a[1], b[1]), max(a[2], b[2]))
        if isinstance(s, A.LetBool):
            size, ld, bd = go(s.body, loops, nb + 1)
            return (size, ld, max(bd, nb + 1))
        if isinstance(s, A.LetOut):
            return go(s.body, loops, nb)
        if isinstance(s, A.Skip):
            return (0, loops, nb)
        return (1, loops, nb)

    rows = [go(f.body, 0, 0) for f in getattr(p, "program", p).functions]
    return Metrics(sum(r[0] for r in rows), max((r[1] for r in rows), default=0), max((r[2] for r in rows), default=0))


def metrics(x) -> Metrics:
    """Metrics of a simple program or of a high-level program."""
    return simple_metrics(x) if isinstance(x, SimpleProgram) else hl_metrics(x)
