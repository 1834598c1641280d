"""In-process decision procedure: first-order formulas on words to DFAs.

The classical automata construction behind MONA, restricted to first-order
variables.  A formula with free position variables V is read over the
alphabet ``letters x {0,1}^V``; a word is well formed when every variable
track is set at exactly one position.  Languages are only meaningful on
well-formed words, so negation is plain complementation and ``exists x``
intersects with "x is set exactly once" before projecting the track away.
Every intermediate automaton is minimized.

Tag and boolean quantifiers are expanded into finite case splits first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import BLANK, fo


class StateLimit(Exception):
    """An intermediate automaton exceeded the configured state budget."""


@dataclass(eq=False)
class DFA:
    vars: tuple[str, ...]
    nletters: int
    delta: np.ndarray  # (states, nletters * 2**len(vars)), initial state 0
    accept: np.ndarray

    @property
    def states(self) -> int:
        return len(self.accept)

    def symbol(self, letter: int, bits: dict[str, int]) -> int:
        code = sum(bits.get(v, 0) << j for j, v in enumerate(self.vars))
        return letter * (1 << len(self.vars)) + code


def _symbols(nletters: int, vars_: tuple[str, ...]):
    """Arrays (letter, bit-of-var...) indexed by symbol number."""
    k = len(vars_)
    idx = np.arange(nletters << k)
    return idx >> k, {v: (idx >> j) & 1 for j, v in enumerate(vars_)}


def _build(vars_, nletters, n, step, accepting) -> DFA:
    """DFA from a per-state python transition function step(state, letter, bits)."""
    k = len(vars_)
    delta = np.zeros((n, nletters << k), dtype=np.int64)
    for s in range(n):
        for sym in range(nletters << k):
            bits = {v: (sym >> j) & 1 for j, v in enumerate(vars_)}
            delta[s, sym] = step(s, sym >> k, bits)
    return DFA(tuple(vars_), nletters, delta, np.array([s in accepting for s in range(n)]))


_RNG = np.random.default_rng(20240601)


def _row_ids(rows: np.ndarray) -> np.ndarray:
    """Dense ids for equal rows of an int matrix (exact)."""
    rows = np.ascontiguousarray(rows)
    keys = rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()
    _, inv = np.unique(keys, return_inverse=True)
    return inv.ravel()


def _refine(cls: np.ndarray, delta: np.ndarray) -> np.ndarray:
    # hash the signature rows; fall back to exact comparison on a collision
    weights = _RNG.integers(1, 2**62, size=delta.shape[1] + 1, dtype=np.int64)
    with np.errstate(over="ignore"):
        h = cls * weights[0] + (cls[delta] * weights[1:]).sum(axis=1)
    _, new = np.unique(h, return_inverse=True)
    new = new.ravel()
    rep = np.zeros(int(new.max()) + 1, dtype=np.int64)
    rep[new] = np.arange(len(new))
    r = rep[new]
    if (cls[r] == cls).all() and (cls[delta[r]] == cls[delta]).all():
        return new
    return _row_ids(np.column_stack([cls, cls[delta]]))


def minimize(a: DFA) -> DFA:
    _, cls = np.unique(a.accept, return_inverse=True)
    cls = cls.ravel()
    count = int(cls.max()) + 1
    while True:
        new = _refine(cls, a.delta)
        c = int(new.max()) + 1
        if c == count:
            break
        cls, count = new, c
    # renumber so that the initial state is 0, in order of first occurrence
    first = np.full(count, a.states, dtype=np.int64)
    np.minimum.at(first, cls, np.arange(a.states))
    first[cls[0]] = -1
    remap = np.empty(count, dtype=np.int64)
    remap[np.argsort(first, kind="stable")] = np.arange(count)
    reps = np.empty(count, dtype=np.int64)
    reps[remap[cls[::-1]]] = np.arange(a.states - 1, -1, -1)
    delta = remap[cls[a.delta[reps]]]
    return DFA(a.vars, a.nletters, delta, a.accept[reps])


def _lift(a: DFA, vars_: tuple[str, ...]) -> DFA:
    if vars_ == a.vars:
        return a
    letter, bits = _symbols(a.nletters, vars_)
    old = letter << len(a.vars)
    for j, v in enumerate(a.vars):
        old = old + (bits[v] << j)
    return DFA(vars_, a.nletters, a.delta[:, old], a.accept)


class Builder:
    def __init__(self, alphabet: list[str], max_states: int = 200_000):
        self.alphabet = alphabet
        self.index = {c: k for k, c in enumerate(alphabet)}
        self.n = len(alphabet)
        self.max_states = max_states
        self.memo: dict[int, DFA] = {}

    # atoms -------------------------------------------------------------
    def const(self, value: bool) -> DFA:
        return DFA((), self.n, np.zeros((1, self.n), dtype=np.int64), np.array([value]))

    def letter(self, x: str, a: str) -> DFA:
        want = self.index.get(a)

        def step(s, letter, bits):
            if s == 0 and bits[x]:
                return 1 if letter == want else 2
            return s

        return _build((x,), self.n, 3, step, {1})

    def eq(self, x: str, y: str) -> DFA:
        vs = tuple(sorted((x, y)))

        def step(s, letter, bits):
            if s == 0 and bits[x] and bits[y]:
                return 1
            return s

        return _build(vs, self.n, 2, step, {1})

    def lt(self, x: str, y: str) -> DFA:
        vs = tuple(sorted((x, y)))

        def step(s, letter, bits):
            if s == 0 and bits[x] and not bits[y]:
                return 1
            if s == 1 and bits[y]:
                return 2
            return s

        return _build(vs, self.n, 3, step, {2})

    def single(self, x: str) -> DFA:
        def step(s, letter, bits):
            return min(s + bits[x], 2)

        return _build((x,), self.n, 3, step, {1})

    # boolean operations ------------------------------------------------
    def product(self, a: DFA, b: DFA, op) -> DFA:
        vs = tuple(sorted(set(a.vars) | set(b.vars)))
        a, b = _lift(a, vs), _lift(b, vs)
        nb = b.states
        index = {0: 0}
        rows = []
        frontier = np.array([0], dtype=np.int64)
        while len(frontier):
            nxt = a.delta[frontier // nb] * nb + b.delta[frontier % nb]
            rows.append(nxt)
            new = []
            for c in np.unique(nxt).tolist():
                if c not in index:
                    index[c] = len(index)
                    new.append(c)
            if len(index) > self.max_states:
                raise StateLimit(len(index))
            frontier = np.array(new, dtype=np.int64)
        codes = np.array(list(index.keys()), dtype=np.int64)
        order = np.argsort(codes)
        flat = np.vstack(rows)
        delta = np.array(list(index.values()))[order][np.searchsorted(codes[order], flat)]
        accept = op(a.accept[codes // nb], b.accept[codes % nb])
        return minimize(DFA(vs, self.n, delta, accept))

    def complement(self, a: DFA) -> DFA:
        return DFA(a.vars, a.nletters, a.delta, ~a.accept)

    def exists(self, x: str, a: DFA) -> DFA:
        if x not in a.vars:
            # the body does not mention x; words have at least one position
            return self.product(a, self.nonempty(), np.logical_and)
        a = self.product(a, self.single(x), np.logical_and)
        rest = tuple(v for v in a.vars if v != x)
        letter, bits = _symbols(self.n, rest)
        base = letter << len(a.vars)
        for j, v in enumerate(a.vars):
            if v != x:
                base = base + (bits[v] << j)
        with0 = base
        with1 = base + (1 << a.vars.index(x))
        nsym = len(base)
        n = a.states
        index: dict[bytes, int] = {}
        subsets: list[np.ndarray] = []
        rows = []

        def intern(packed: np.ndarray) -> int:
            key = packed.tobytes()
            k = index.get(key)
            if k is None:
                k = index[key] = len(subsets)
                subsets.append(packed)
                if k >= self.max_states:
                    raise StateLimit(k)
            return k

        start = np.zeros(n, dtype=bool)
        start[0] = True
        intern(np.packbits(start))
        cols = np.arange(nsym)
        k = 0
        while k < len(subsets):
            members = np.flatnonzero(np.unpackbits(subsets[k], count=n))
            sub = a.delta[members]
            masks = np.zeros((nsym, n), dtype=bool)
            masks[cols, sub[:, with0]] = True
            masks[cols, sub[:, with1]] = True
            packed = np.packbits(masks, axis=1)
            keys = packed.view(np.dtype((np.void, packed.shape[1]))).ravel()
            _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
            ids = np.array([intern(packed[j]) for j in first], dtype=np.int64)
            rows.append(ids[inv.ravel()])
            k += 1
        delta = np.array(rows, dtype=np.int64)
        accept = np.array([bool(a.accept[np.unpackbits(m, count=n).astype(bool)].any()) for m in subsets])
        return minimize(DFA(rest, self.n, delta, accept))

    def nonempty(self) -> DFA:
        delta = np.ones((2, self.n), dtype=np.int64)
        return DFA((), self.n, delta, np.array([False, True]))

    # formulas ----------------------------------------------------------
    def build(self, f: fo.Formula) -> DFA:
        for g in fo._postorder(f):
            if id(g) not in self.memo:
                self.memo[id(g)] = self._node(g)
        return self.memo[id(f)]

    def _node(self, g: fo.Formula) -> DFA:
        t = type(g)
        m = self.memo
        if t is fo.Const:
            return self.const(g.value)
        if t is fo.Letter:
            return self.letter(g.x, g.a)
        if t is fo.PosEq:
            return self.eq(g.x, g.y)
        if t is fo.PosLt:
            return self.lt(g.x, g.y)
        if t is fo.Not:
            return self.complement(m[id(g.arg)])
        if t in (fo.And, fo.Or):
            op = np.logical_and if t is fo.And else np.logical_or
            parts = sorted((m[id(c)] for c in g.args), key=lambda d: d.states)
            acc = parts[0]
            for p in parts[1:]:
                acc = self.product(acc, p, op)
            return acc
        if t is fo.Quant and g.sort == fo.POS:
            body = m[id(g.body)]
            if g.forall:
                return self.complement(self.exists(g.var, self.complement(body)))
            return self.exists(g.var, body)
        raise ValueError(f"unsupported node {t.__name__}; expand tag and boolean quantifiers first")


def shortest_word(a: DFA, alphabet: list[str]) -> str | None:
    """A shortest accepted word of a closed automaton, or None if empty."""
    if a.vars:
        raise ValueError("automaton has free variables")
    parent = {0: None}
    queue = [0]
    for s in queue:
        if a.accept[s]:
            out = []
            while parent[s] is not None:
                s, c = parent[s]
                out.append(alphabet[c])
            return "".join(reversed(out))
        for c in range(a.nletters):
            t = int(a.delta[s, c])
            if t not in parent:
                parent[t] = (s, c)
                queue.append(t)
    return None


def decide(f: fo.Formula, max_states: int = 200_000) -> tuple[bool, str | None, int]:
    """(satisfiable, shortest witness, largest intermediate automaton)."""
    if fo.free_vars(f):
        raise ValueError("only closed formulas are decided")
    g = fo.expand_finite(f)
    alphabet = sorted(fo.letters(g) | {BLANK})
    b = Builder(alphabet, max_states)
    a = b.build(g)
    w = shortest_word(a, alphabet)
    largest = max(d.states for d in b.memo.values())
    return w is not None, w, largest
