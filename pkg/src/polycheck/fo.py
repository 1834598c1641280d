"""First-order logic on finite words with auxiliary tag and boolean sorts.

Formulas are immutable and compared by identity, so that large formulas
can share sub-formulas (a DAG).  Sizes are nevertheless reported as tree
sizes.  Use the smart constructors (`conj`, `disj`, `neg`, `exists`, ...)
rather than the node classes.
"""
from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from typing import Iterable, Union

from . import BLANK

POS, TAG, BOOL = "pos", "tag", "bool"

# formulas built by the compiler nest deeply
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(eq=False)
class Formula:
    _fv: frozenset | None = field(default=None, init=False, repr=False)
    _qr: int | None = field(default=None, init=False, repr=False)
    _size: int | None = field(default=None, init=False, repr=False)

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return to_dsl(self)


@dataclass(eq=False)
class Const(Formula):
    value: bool = True


@dataclass(eq=False)
class And(Formula):
    args: tuple = ()

    def children(self):
        return self.args


@dataclass(eq=False)
class Or(Formula):
    args: tuple = ()

    def children(self):
        return self.args


@dataclass(eq=False)
class Not(Formula):
    arg: Formula = None

    def children(self):
        return (self.arg,)


@dataclass(eq=False)
class Quant(Formula):
    forall: bool = False
    sort: str = POS
    var: str = ""
    body: Formula = None
    domain: tuple = ()  # tag constants, for sort == TAG

    def children(self):
        return (self.body,)


@dataclass(eq=False)
class PosEq(Formula):
    x: str = ""
    y: str = ""


@dataclass(eq=False)
class PosLt(Formula):
    x: str = ""
    y: str = ""


@dataclass(eq=False)
class Letter(Formula):
    """x =_L a: the letter at position x is `a`."""

    x: str = ""
    a: str = ""


@dataclass(eq=False)
class TagIs(Formula):
    t: str = ""
    tag: str = ""


@dataclass(eq=False)
class TagEq(Formula):
    t: str = ""
    u: str = ""


@dataclass(eq=False)
class BoolAtom(Formula):
    b: str = ""


TRUE = Const(True)
FALSE = Const(False)

# hash-consing: structurally equal formulas are the same object
_TABLE: dict = {}


def _mk(cls, key, **fields):
    node = _TABLE.get(key)
    if node is None:
        node = _TABLE[key] = cls(**fields)
    return node


def intern_table_size() -> int:
    return len(_TABLE)


# ---------------------------------------------------------------- constructors


def _complement_in(g: Formula, seen: set[int]) -> bool:
    if isinstance(g, Not):
        return id(g.arg) in seen
    other = _TABLE.get(("not", id(g)))
    return other is not None and id(other) in seen


def conj(*fs: Formula) -> Formula:
    out: list[Formula] = []
    seen: set[int] = set()
    for f in fs:
        parts = f.args if isinstance(f, And) else (f,)
        for g in parts:
            if g is TRUE:
                continue
            if g is FALSE or _complement_in(g, seen):
                return FALSE
            if id(g) not in seen:
                seen.add(id(g))
                out.append(g)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return _mk(And, ("and",) + tuple(id(g) for g in out), args=tuple(out))


def disj(*fs: Formula) -> Formula:
    out: list[Formula] = []
    seen: set[int] = set()
    for f in fs:
        parts = f.args if isinstance(f, Or) else (f,)
        for g in parts:
            if g is FALSE:
                continue
            if g is TRUE or _complement_in(g, seen):
                return TRUE
            if id(g) not in seen:
                seen.add(id(g))
                out.append(g)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return _mk(Or, ("or",) + tuple(id(g) for g in out), args=tuple(out))


def neg(f: Formula) -> Formula:
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return _mk(Not, ("not", id(f)), arg=f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    if a is b:
        return TRUE
    if a is TRUE:
        return b
    if b is TRUE:
        return a
    if a is FALSE:
        return neg(b)
    if b is FALSE:
        return neg(a)
    return disj(conj(a, b), conj(neg(a), neg(b)))


def quant(forall: bool, sort: str, var: str, body: Formula, domain: Iterable[str] = ()) -> Formula:
    if sort != POS and var not in free_vars(body):
        return body
    if sort == TAG and not tuple(domain):
        return TRUE if forall else FALSE
    # miniscoping: parts not mentioning var move out (valid on empty domains too)
    split = Or if forall else And
    if isinstance(body, split):
        inside = [g for g in body.args if var in free_vars(g)]
        outside = [g for g in body.args if var not in free_vars(g)]
        if outside:
            join = disj if forall else conj
            return join(*outside, quant(forall, sort, var, join(*inside), domain))
    domain = tuple(domain)
    return _mk(Quant, ("q", forall, sort, var, id(body), domain), forall=forall, sort=sort, var=var, body=body, domain=domain)


def exists(var: str, body: Formula, sort: str = POS, domain: Iterable[str] = ()) -> Formula:
    return quant(False, sort, var, body, domain)


def forall(var: str, body: Formula, sort: str = POS, domain: Iterable[str] = ()) -> Formula:
    return quant(True, sort, var, body, domain)


def exists_many(vars_: Iterable[str], body: Formula, sort: str = POS) -> Formula:
    for v in reversed(list(vars_)):
        body = exists(v, body, sort)
    return body


def pos_eq(x: str, y: str) -> Formula:
    return TRUE if x == y else _mk(PosEq, ("=", x, y), x=x, y=y)


def pos_lt(x: str, y: str) -> Formula:
    return FALSE if x == y else _mk(PosLt, ("<", x, y), x=x, y=y)


def pos_le(x: str, y: str) -> Formula:
    return disj(pos_lt(x, y), pos_eq(x, y))


def letter(x: str, a: str) -> Formula:
    return _mk(Letter, ("L", x, a), x=x, a=a)


def tag_is(t: str, tag: str) -> Formula:
    return _mk(TagIs, ("is", t, tag), t=t, tag=tag)


def tag_eq(t: str, u: str) -> Formula:
    return TRUE if t == u else _mk(TagEq, ("teq", t, u), t=t, u=u)


def bvar(b: str) -> Formula:
    return _mk(BoolAtom, ("b", b), b=b)


def succ(x: str, y: str, z: str = "z") -> Formula:
    """y is the successor position of x (z is a fresh bound name)."""
    return conj(pos_lt(x, y), neg(exists(z, conj(pos_lt(x, z), pos_lt(z, y)))))


# ---------------------------------------------------------------- measures


def free_vars(f: Formula) -> frozenset:
    if f._fv is not None:
        return f._fv
    for g in _postorder(f):
        if g._fv is not None:
            continue
        if isinstance(g, (PosEq, PosLt)):
            g._fv = frozenset((g.x, g.y))
        elif isinstance(g, Letter):
            g._fv = frozenset((g.x,))
        elif isinstance(g, TagIs):
            g._fv = frozenset((g.t,))
        elif isinstance(g, TagEq):
            g._fv = frozenset((g.t, g.u))
        elif isinstance(g, BoolAtom):
            g._fv = frozenset((g.b,))
        elif isinstance(g, Quant):
            g._fv = g.body._fv - {g.var}
        elif isinstance(g, Const):
            g._fv = frozenset()
        else:
            acc: set = set()
            for c in g.children():
                acc |= c._fv
            g._fv = frozenset(acc)
    return f._fv


def _postorder(f: Formula):
    seen: set[int] = set()
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            yield g
            continue
        if id(g) in seen:
            continue
        seen.add(id(g))
        stack.append((g, True))
        stack.extend((c, False) for c in g.children())


def qrank(f: Formula) -> int:
    """Maximal nesting of quantifiers of any sort."""
    if f._qr is None:
        for g in _postorder(f):
            if g._qr is None:
                sub = max((c._qr for c in g.children()), default=0)
                g._qr = sub + (1 if isinstance(g, Quant) else 0)
    return f._qr


def size(f: Formula) -> int:
    """Number of nodes of the formula seen as a tree."""
    if f._size is None:
        for g in _postorder(f):
            if g._size is None:
                g._size = 1 + sum(c._size for c in g.children())
    return f._size


def dag_size(f: Formula) -> int:
    return sum(1 for _ in _postorder(f))


def letters(f: Formula) -> set[str]:
    return {g.a for g in _postorder(f) if isinstance(g, Letter)}


def tags_of(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in _postorder(f):
        if isinstance(g, TagIs):
            out.add(g.tag)
        elif isinstance(g, Quant) and g.sort == TAG:
            out.update(g.domain)
    return out


def bound_sorts(f: Formula) -> dict[str, str]:
    return {g.var: g.sort for g in _postorder(f) if isinstance(g, Quant)}


def free_sorts(f: Formula) -> dict[str, str]:
    """Sort of each free variable, inferred from the atoms using it."""
    out: dict[str, str] = {}
    fv = free_vars(f)
    for g in _postorder(f):
        if isinstance(g, (PosEq, PosLt)):
            names, s = (g.x, g.y), POS
        elif isinstance(g, Letter):
            names, s = (g.x,), POS
        elif isinstance(g, TagIs):
            names, s = (g.t,), TAG
        elif isinstance(g, TagEq):
            names, s = (g.t, g.u), TAG
        elif isinstance(g, BoolAtom):
            names, s = (g.b,), BOOL
        else:
            continue
        for n in names:
            if n in fv:
                out[n] = s
    return out


# ---------------------------------------------------------------- substitution


def substitute(f: Formula, m: dict) -> Formula:
    """Replace free variables: names map to names, booleans may map to formulas."""
    if not m:
        return f
    memo: dict[int, Formula] = {}
    return _subst(f, m, memo)


def _subst(f, m, memo):
    fv = free_vars(f)
    if not any(k in fv for k in m):
        return f
    key = id(f)
    if key in memo:
        return memo[key]

    def ren(v):
        r = m.get(v, v)
        return r

    if isinstance(f, PosEq):
        r = pos_eq(ren(f.x), ren(f.y))
    elif isinstance(f, PosLt):
        r = pos_lt(ren(f.x), ren(f.y))
    elif isinstance(f, Letter):
        r = letter(ren(f.x), f.a)
    elif isinstance(f, TagIs):
        t = ren(f.t)
        if isinstance(t, _TagConst):
            r = TRUE if t.tag == f.tag else FALSE
        else:
            r = tag_is(t, f.tag)
    elif isinstance(f, TagEq):
        t, u = ren(f.t), ren(f.u)
        if isinstance(t, _TagConst) and isinstance(u, _TagConst):
            r = TRUE if t.tag == u.tag else FALSE
        elif isinstance(t, _TagConst):
            r = tag_is(u, t.tag)
        elif isinstance(u, _TagConst):
            r = tag_is(t, u.tag)
        else:
            r = tag_eq(t, u)
    elif isinstance(f, BoolAtom):
        b = ren(f.b)
        r = b if isinstance(b, Formula) else bvar(b)
    elif isinstance(f, Quant):
        if f.var in m:
            m2 = {k: v for k, v in m.items() if k != f.var}
            r = quant(f.forall, f.sort, f.var, substitute(f.body, m2), f.domain)
        else:
            r = quant(f.forall, f.sort, f.var, _subst(f.body, m, memo), f.domain)
    elif isinstance(f, And):
        r = conj(*(_subst(c, m, memo) for c in f.args))
    elif isinstance(f, Or):
        r = disj(*(_subst(c, m, memo) for c in f.args))
    elif isinstance(f, Not):
        r = neg(_subst(f.arg, m, memo))
    else:
        r = f
    memo[key] = r
    return r


@dataclass(eq=False)
class _TagConst(Formula):
    """Substitution target standing for a tag constant (never a formula node)."""

    tag: str = ""


def tag_const(tag: str) -> _TagConst:
    return _TagConst(tag=tag)


# ---------------------------------------------------------------- transformations


def nnf(f: Formula) -> Formula:
    """Negation normal form (negations only on atoms)."""
    memo: dict = {}

    def go(g, positive):
        key = (id(g), positive)
        if key in memo:
            return memo[key]
        if isinstance(g, Not):
            r = go(g.arg, not positive)
        elif isinstance(g, And):
            parts = [go(c, positive) for c in g.args]
            r = conj(*parts) if positive else disj(*parts)
        elif isinstance(g, Or):
            parts = [go(c, positive) for c in g.args]
            r = disj(*parts) if positive else conj(*parts)
        elif isinstance(g, Quant):
            r = quant(g.forall == positive, g.sort, g.var, go(g.body, positive), g.domain)
        else:
            r = g if positive else neg(g)
        memo[key] = r
        return r

    return go(f, True)


def expand_finite(f: Formula) -> Formula:
    """Replace tag and boolean quantifiers by finite conjunctions/disjunctions."""
    memo: dict = {}

    def go(g):
        if id(g) in memo:
            return memo[id(g)]
        if isinstance(g, Quant):
            body = go(g.body)
            if g.sort == POS:
                r = quant(g.forall, POS, g.var, body)
            else:
                vals = [tag_const(t) for t in g.domain] if g.sort == TAG else [FALSE, TRUE]
                insts = [substitute(body, {g.var: v}) for v in vals]
                r = conj(*insts) if g.forall else disj(*insts)
        elif isinstance(g, And):
            r = conj(*(go(c) for c in g.args))
        elif isinstance(g, Or):
            r = disj(*(go(c) for c in g.args))
        elif isinstance(g, Not):
            r = neg(go(g.arg))
        else:
            r = g
        memo[id(g)] = r
        return r

    return go(f)


# ---------------------------------------------------------------- evaluation


class WordModel:
    """Evaluates formulas on a fixed word, memoizing quantified sub-formulas."""

    def __init__(self, word: str):
        self.word = word
        self.n = len(word)
        self.memo: dict = {}
        self.fvs: dict[int, tuple] = {}

    def holds(self, f: Formula, env: dict | None = None) -> bool:
        return self._ev(f, dict(env or {}))

    def _ev(self, f, env) -> bool:
        t = type(f)
        if t is And:
            for c in f.args:
                if not self._ev(c, env):
                    return False
            return True
        if t is Or:
            for c in f.args:
                if self._ev(c, env):
                    return True
            return False
        if t is Not:
            return not self._ev(f.arg, env)
        if t is BoolAtom:
            return env[f.b]
        if t is Letter:
            return self.word[env[f.x]] == f.a
        if t is PosLt:
            return env[f.x] < env[f.y]
        if t is PosEq:
            return env[f.x] == env[f.y]
        if t is Quant:
            fid = id(f)
            fv = self.fvs.get(fid)
            if fv is None:
                fv = self.fvs[fid] = tuple(sorted(free_vars(f)))
            key = (fid,) + tuple(env[v] for v in fv)
            r = self.memo.get(key)
            if r is None:
                r = self._quant(f, env)
                self.memo[key] = r
            return r
        if t is TagIs:
            return env[f.t] == f.tag
        if t is TagEq:
            return env[f.t] == env[f.u]
        if t is Const:
            return f.value
        raise TypeError(f"cannot evaluate {t.__name__}")

    def _quant(self, f: Quant, env) -> bool:
        if f.sort == POS:
            vals = range(self.n)
        elif f.sort == BOOL:
            vals = (False, True)
        else:
            vals = f.domain
        v = f.var
        had = v in env
        old = env.get(v)
        want = not f.forall
        result = not want
        for x in vals:
            env[v] = x
            if self._ev(f.body, env) == want:
                result = want
                break
        if had:
            env[v] = old
        else:
            env.pop(v, None)
        return result


def eval_formula(f: Formula, word: str, env: dict | None = None) -> bool:
    """Truth of `f` on `word` (positions are 0-based) under `env`."""
    missing = free_vars(f) - set(env or {})
    if missing:
        raise ValueError(f"unbound variables {sorted(missing)}")
    return WordModel(word).holds(f, env)


@dataclass(frozen=True)
class Sat:
    witness: str


@dataclass(frozen=True)
class NoWitnessUpTo:
    maxlen: int


def words_over(alphabet: Iterable[str], maxlen: int, minlen: int = 0):
    alpha = sorted(set(alphabet))
    for n in range(minlen, maxlen + 1):
        for t in itertools.product(alpha, repeat=n):
            yield "".join(t)


def bounded_sat(f: Formula, maxlen: int, extra_letters: Iterable[str] = ()) -> Union[Sat, NoWitnessUpTo]:
    """Search all words over letters(f) + blank up to `maxlen` for a model."""
    if free_vars(f):
        raise ValueError("bounded_sat needs a closed formula")
    alpha = letters(f) | set(extra_letters) | {BLANK}
    for w in words_over(alpha, maxlen):
        if WordModel(w).holds(f):
            return Sat(w)
    return NoWitnessUpTo(maxlen)


# ---------------------------------------------------------------- printing


def _q(c: str) -> str:
    if c == BLANK:
        return "'\\u{e000}'"
    if c in ("'", "\\"):
        return "'\\" + c + "'"
    if not c.isprintable() or (c.isspace() and c != " "):
        return f"'\\u{{{ord(c):x}}}'"
    return f"'{c}'"


def to_dsl(f: Formula) -> str:
    """Render in the spec language (extended with tag and bool sorts)."""

    def go(g, prec):
        # prec: 0 = top, 1 = inside or, 2 = inside and, 3 = atom position
        if isinstance(g, Const):
            return "true" if g.value else "false"
        if isinstance(g, PosEq):
            return f"{g.x} = {g.y}"
        if isinstance(g, PosLt):
            return f"{g.x} < {g.y}"
        if isinstance(g, Letter):
            return f"label({g.x}) == {_q(g.a)}"
        if isinstance(g, TagIs):
            return f"{g.t} is {g.tag}"
        if isinstance(g, TagEq):
            return f"{g.t} = {g.u}"
        if isinstance(g, BoolAtom):
            return g.b
        if isinstance(g, Not):
            return f"not {go(g.arg, 3)}"
        if isinstance(g, And):
            s = " and ".join(go(c, 2) for c in g.args)
            return f"({s})" if prec > 2 else s
        if isinstance(g, Or):
            s = " or ".join(go(c, 1) for c in g.args)
            return f"({s})" if prec > 1 else s
        if isinstance(g, Quant):
            q = "forall" if g.forall else "exists"
            if g.sort == POS:
                head = f"{q} {g.var}."
            elif g.sort == BOOL:
                head = f"{q} {g.var} : bool."
            else:
                head = f"{q} {g.var} : tag{{{', '.join(g.domain)}}}."
            s = f"{head} {go(g.body, 0)}"
            return f"({s})" if prec > 0 else s
        raise TypeError(g)

    return go(f, 0)


# ---------------------------------------------------------------- compiled evaluation


class CompiledFormulas:
    """Formulas translated to Python functions for repeated evaluation.

    Every quantifier (and every shared compound sub-formula) becomes a
    memoized function of its free variables.  Call `set_word` before
    evaluating; `fn(k)` is the k-th formula as a function of its parameters.
    """

    _MAX_DEPTH = 40

    def __init__(self, items: list[tuple[Formula, tuple[str, ...]]]):
        self._py: dict[str, str] = {}
        self._fn: dict[int, str] = {}
        self._memos: list[str] = []
        self._defs: list[str] = []
        parents: dict[int, int] = {}
        for f, _ in items:
            for g in _postorder(f):
                for c in g.children():
                    parents[id(c)] = parents.get(id(c), 0) + 1
        self._parents = parents
        roots = []
        for k, (f, params) in enumerate(items):
            extra = free_vars(f) - set(params)
            if extra:
                raise ValueError(f"formula has free variables {sorted(extra)} beyond {params}")
            body = self._expr(f)
            args = ", ".join(self._var(p) for p in params)
            self._defs.append(f"def R{k}({args}):\n    return {body}\n")
            roots.append(f"R{k}")
        self.ns: dict = {"W": "", "RN": range(0)}
        for m in self._memos:
            self.ns[m] = {}
        exec("\n".join(self._defs), self.ns)
        self._roots = [self.ns[r] for r in roots]
        self.source_lines = sum(d.count("\n") for d in self._defs)
        del self._defs

    def _var(self, name: str) -> str:
        py = self._py.get(name)
        if py is None:
            py = self._py[name] = f"v{len(self._py)}"
        return py

    def _expr(self, g: Formula, depth: int = 0) -> str:
        t = type(g)
        if t is PosLt:
            return f"({self._var(g.x)} < {self._var(g.y)})"
        if t is PosEq:
            return f"({self._var(g.x)} == {self._var(g.y)})"
        if t is Letter:
            return f"(W[{self._var(g.x)}] == {g.a!r})"
        if t is BoolAtom:
            return self._var(g.b)
        if t is TagIs:
            return f"({self._var(g.t)} == {g.tag!r})"
        if t is TagEq:
            return f"({self._var(g.t)} == {self._var(g.u)})"
        if t is Const:
            return "True" if g.value else "False"
        if t is Quant or self._parents.get(id(g), 0) > 1 or depth > self._MAX_DEPTH:
            return self._call(g)
        if t is Not:
            return f"(not {self._expr(g.arg, depth + 1)})"
        op = " and " if t is And else " or "
        return "(" + op.join(self._expr(c, depth + 1) for c in g.args) + ")"

    def _call(self, g: Formula) -> str:
        fv = sorted(free_vars(g))
        args = ", ".join(self._var(v) for v in fv)
        name = self._fn.get(id(g))
        if name is None:
            k = len(self._fn)
            name = self._fn[id(g)] = f"F{k}"
            memo = f"M{k}"
            self._memos.append(memo)
            key = f"({args},)" if fv else "()"
            if type(g) is Quant:
                var = self._var(g.var)
                rng = {POS: "RN", BOOL: "(False, True)"}.get(g.sort, repr(tuple(g.domain)))
                body = self._expr(g.body)
                test = f"not {body}" if g.forall else body
                code = (
                    f"def {name}({args}):\n"
                    f"    key = {key}\n"
                    f"    r = {memo}.get(key)\n"
                    f"    if r is None:\n"
                    f"        r = {g.forall}\n"
                    f"        for {var} in {rng}:\n"
                    f"            if {test}:\n"
                    f"                r = {not g.forall}\n"
                    f"                break\n"
                    f"        {memo}[key] = r\n"
                    f"    return r\n"
                )
            else:
                if type(g) is Not:
                    body = f"(not {self._expr(g.arg, 1)})"
                else:
                    op = " and " if type(g) is And else " or "
                    body = "(" + op.join(self._expr(c, 1) for c in g.args) + ")"
                code = (
                    f"def {name}({args}):\n"
                    f"    key = {key}\n"
                    f"    r = {memo}.get(key)\n"
                    f"    if r is None:\n"
                    f"        r = {memo}[key] = {body}\n"
                    f"    return r\n"
                )
            self._defs.append(code)
        return f"{name}({args})"

    def set_word(self, w: str) -> None:
        self.ns["W"] = w
        self.ns["RN"] = range(len(w))
        for m in self._memos:
            self.ns[m].clear()

    def fn(self, k: int):
        return self._roots[k]
