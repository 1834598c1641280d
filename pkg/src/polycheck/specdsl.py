"""Parser for pre/postconditions written as first-order formulas on words.

Grammar (loosest binding first)::

    formula := ('forall' | 'exists') IDENT [':' sort] '.' formula
             | disj ['->' formula]
    disj    := conj ('or' conj)*
    conj    := unary ('and' unary)*
    unary   := 'not' unary | '(' formula ')' | quantified | atom
    atom    := 'true' | 'false' | 'label' '(' IDENT ')' ('=='|'!=') CHAR
             | IDENT ('<'|'<='|'>'|'>='|'='|'!=') IDENT | IDENT 'is' IDENT
             | IDENT                       (a boolean variable)
             | ('contains_factor'|'starts_with'|'ends_with') '(' STRING ')'
    sort    := 'pos' | 'bool' | 'tag' '{' IDENT (',' IDENT)* '}'

Variables are positions unless bound with another sort.
"""
from __future__ import annotations

import itertools
import re

from . import fo
from .errors import ParseError

_TOKEN = re.compile(
    r"""\s*(?:
      (?P<char>'(?:\\u\{[0-9a-fA-F]+\}|\\.|[^'\\])')
    | (?P<string>"(?:\\u\{[0-9a-fA-F]+\}|\\.|[^"\\])*")
    | (?P<ident>[A-Za-z_][A-Za-z0-9_#]*)
    | (?P<sym>->|==|!=|<=|>=|[<>=().,:{}])
    )""",
    re.VERBOSE,
)

_ESC = {"n": "\n", "t": "\t", "s": " ", "\\": "\\", "'": "'", '"': '"'}

KEYWORDS = {"forall", "exists", "and", "or", "not", "true", "false", "label", "is"}


def _unescape(body: str) -> str:
    out, k = [], 0
    while k < len(body):
        c = body[k]
        if c != "\\":
            out.append(c)
            k += 1
            continue
        nxt = body[k + 1]
        if nxt == "u":
            end = body.index("}", k)
            out.append(chr(int(body[k + 3:end], 16)))
            k = end + 1
        else:
            out.append(_ESC.get(nxt, nxt))
            k += 2
    return "".join(out)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", None)
        kind = m.lastgroup
        val = m.group(kind)
        toks.append((kind, val, m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0
        self.sorts: list[dict[str, str]] = [{}]
        self.fresh = itertools.count()

    def peek(self, off: int = 0):
        return self.toks[min(self.k + off, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def accept(self, val: str) -> bool:
        kind, v, _ = self.peek()
        if v == val and kind in ("sym", "ident"):
            self.k += 1
            return True
        return False

    def expect(self, val: str):
        if not self.accept(val):
            kind, v, p = self.peek()
            raise ParseError(f"expected {val!r}, found {v or kind!r} at offset {p}", None, expected=[val])

    def ident(self) -> str:
        kind, v, p = self.next()
        if kind != "ident" or v in KEYWORDS:
            raise ParseError(f"expected identifier, found {v or kind!r} at offset {p}", None)
        return v

    def sort_of(self, name: str) -> str:
        for scope in reversed(self.sorts):
            if name in scope:
                return scope[name]
        return fo.POS

    # grammar ----------------------------------------------------------
    def formula(self):
        kind, v, _ = self.peek()
        if v in ("forall", "exists"):
            return self.quantified()
        left = self.disj()
        if self.accept("->"):
            return fo.implies(left, self.formula())
        return left

    def quantified(self):
        q = self.next()[1]
        var = self.ident()
        sort, domain = fo.POS, ()
        if self.accept(":"):
            s = self.ident() if self.peek()[1] != "tag" else self.next()[1]
            if s == "tag":
                self.expect("{")
                names = [self.ident()]
                while self.accept(","):
                    names.append(self.ident())
                self.expect("}")
                sort, domain = fo.TAG, tuple(names)
            elif s in ("bool", "pos"):
                sort = fo.BOOL if s == "bool" else fo.POS
            else:
                raise ParseError(f"unknown sort {s!r}", None)
        self.expect(".")
        self.sorts.append({var: sort})
        body = self.formula()
        self.sorts.pop()
        return fo.quant(q == "forall", sort, var, body, domain)

    def disj(self):
        parts = [self.conj()]
        while self.accept("or"):
            parts.append(self.conj())
        return fo.disj(*parts)

    def conj(self):
        parts = [self.unary()]
        while self.accept("and"):
            parts.append(self.unary())
        return fo.conj(*parts)

    def unary(self):
        kind, v, _ = self.peek()
        if v == "not" and kind == "ident":
            self.k += 1
            return fo.neg(self.unary())
        if v in ("forall", "exists") and kind == "ident":
            return self.quantified()
        if v == "(" and kind == "sym":
            self.k += 1
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def atom(self):
        kind, v, p = self.peek()
        if kind == "ident" and v in ("true", "false"):
            self.k += 1
            return fo.TRUE if v == "true" else fo.FALSE
        if kind == "ident" and v == "label":
            self.k += 1
            self.expect("(")
            x = self.ident()
            self.expect(")")
            negated = self.accept("!=")
            if not negated:
                self.expect("==")
            ck, cv, cp = self.next()
            if ck != "char":
                raise ParseError(f"expected character literal at offset {cp}", None)
            c = _unescape(cv[1:-1])
            if len(c) != 1:
                raise ParseError(f"bad character literal {cv}", None)
            f = fo.letter(x, c)
            return fo.neg(f) if negated else f
        if kind == "ident" and v in ("contains_factor", "starts_with", "ends_with") and self.peek(1)[1] == "(":
            self.k += 2
            sk, sv, sp = self.next()
            if sk != "string":
                raise ParseError(f"expected string literal at offset {sp}", None)
            self.expect(")")
            return factor_formula(_unescape(sv[1:-1]), v, self.fresh)
        x = self.ident()
        op_kind, op, _ = self.peek()
        if op == "is" and op_kind == "ident":
            self.k += 1
            return fo.tag_is(x, self.ident())
        if op_kind == "sym" and op in ("<", "<=", ">", ">=", "=", "!=", "=="):
            self.k += 1
            y = self.ident()
            sx, sy = self.sort_of(x), self.sort_of(y)
            if sx != sy:
                raise ParseError(f"comparison between sorts {sx} and {sy}", None)
            if sx == fo.TAG:
                if op not in ("=", "==", "!="):
                    raise ParseError("tags are only compared for equality", None)
                f = fo.tag_eq(x, y)
                return fo.neg(f) if op == "!=" else f
            if sx == fo.BOOL:
                raise ParseError("booleans are not compared; use and/or/not", None)
            return _pos_cmp(op, x, y)
        if self.sort_of(x) != fo.BOOL:
            raise ParseError(f"position variable {x!r} used as a formula", None)
        return fo.bvar(x)


def _pos_cmp(op: str, x: str, y: str):
    if op == "<":
        return fo.pos_lt(x, y)
    if op == ">":
        return fo.pos_lt(y, x)
    if op == "<=":
        return fo.pos_le(x, y)
    if op == ">=":
        return fo.pos_le(y, x)
    if op in ("=", "=="):
        return fo.pos_eq(x, y)
    return fo.neg(fo.pos_eq(x, y))


def factor_formula(word: str, mode: str = "contains_factor", fresh=None) -> fo.Formula:
    """Closed formula for D*wD* (or wD* / D*w for starts_with / ends_with)."""
    fresh = fresh or itertools.count()
    if not word:
        return fo.TRUE
    xs = [f"f{next(fresh)}" for _ in word]
    z = f"f{next(fresh)}"
    parts = [fo.letter(x, c) for x, c in zip(xs, word)]
    parts += [fo.succ(a, b, z) for a, b in zip(xs, xs[1:])]
    if mode == "starts_with":
        parts.append(fo.neg(fo.exists(z, fo.pos_lt(z, xs[0]))))
    elif mode == "ends_with":
        parts.append(fo.neg(fo.exists(z, fo.pos_lt(xs[-1], z))))
    return fo.exists_many(xs, fo.conj(*parts))


def parse_formula(text: str) -> fo.Formula:
    """Any formula of the language, free variables allowed."""
    p = _Parser(text)
    f = p.formula()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {v!r} at offset {pos}", None)
    return f


def parse_spec(text: str) -> fo.Formula:
    """A pre- or postcondition: a closed formula."""
    f = parse_formula(text)
    free = sorted(fo.free_vars(f))
    if free:
        raise ParseError(f"unbound variable {free[0]!r}", None)
    return f
