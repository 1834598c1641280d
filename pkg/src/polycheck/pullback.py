"""Pulling postconditions back through interpretations.

``pullback(F, psi)`` is a formula on input words that holds on `w` exactly
when ``F(w)`` satisfies `psi`.  Each output position becomes a tag plus a
tuple of ar(F) input positions.  ``build_chi`` assembles the formula whose
unsatisfiability is the validity of the Hoare triple.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import fo
from .errors import BoundViolation
from .interp import Interpretation, eval_interpretation, xs, ys


def max_arity(F: Interpretation) -> int:
    return max(F.arity.values(), default=0)


def _coords(v: str, k: int) -> tuple[str, ...]:
    return tuple(f"{v}__{j}" for j in range(1, k + 1))


def _tagvar(v: str) -> str:
    return f"{v}__t"


class _Pull:
    def __init__(self, F: Interpretation):
        self.F = F
        self.k = max_arity(F)
        self.tags = F.tags

    def dom(self, v: str) -> fo.Formula:
        t, cs = _tagvar(v), _coords(v, self.k)
        cases = []
        for tag in self.tags:
            a = self.F.arity[tag]
            d = fo.substitute(self.F.dom[tag], dict(zip(xs(a), cs)))
            # surplus coordinates copy the first one (arity-0 tags leave them free)
            pins = [fo.pos_eq(c, cs[0]) for c in cs[a:]] if a else []
            cases.append(fo.conj(fo.tag_is(t, tag), d, *pins))
        return fo.disj(*cases)

    def eq(self, u: str, v: str) -> fo.Formula:
        cu, cv = _coords(u, self.k), _coords(v, self.k)
        cases = []
        for tag in self.tags:
            a = self.F.arity[tag]
            cases.append(fo.conj(fo.tag_is(_tagvar(u), tag), *(fo.pos_eq(x, y) for x, y in zip(cu[:a], cv[:a]))))
        return fo.conj(fo.tag_eq(_tagvar(u), _tagvar(v)), fo.disj(*cases))

    def le(self, u: str, v: str) -> fo.Formula:
        cu, cv = _coords(u, self.k), _coords(v, self.k)
        cases = []
        for t1 in self.tags:
            for t2 in self.tags:
                a1, a2 = self.F.arity[t1], self.F.arity[t2]
                m = dict(zip(xs(a1), cu))
                m.update(zip(ys(a2), cv))
                o = fo.substitute(self.F.order[(t1, t2)], m)
                if o is not fo.FALSE:
                    cases.append(fo.conj(fo.tag_is(_tagvar(u), t1), fo.tag_is(_tagvar(v), t2), o))
        return fo.disj(*cases)

    def letter(self, v: str, a: str) -> fo.Formula:
        cs = _coords(v, self.k)
        cases = []
        for tag in self.tags:
            o = self.F.out[tag]
            if isinstance(o, str):
                if o == a:
                    cases.append(fo.tag_is(_tagvar(v), tag))
            else:
                ar = self.F.arity[tag]
                cases.append(fo.conj(fo.tag_is(_tagvar(v), tag), fo.letter(cs[ar - o], a)))
        return fo.disj(*cases)

    def go(self, g: fo.Formula, memo: dict) -> fo.Formula:
        key = id(g)
        if key in memo:
            return memo[key]
        t = type(g)
        if t is fo.PosEq:
            r = self.eq(g.x, g.y)
        elif t is fo.PosLt:
            r = fo.conj(self.le(g.x, g.y), fo.neg(self.eq(g.x, g.y)))
        elif t is fo.Letter:
            r = self.letter(g.x, g.a)
        elif t is fo.And:
            r = fo.conj(*(self.go(c, memo) for c in g.args))
        elif t is fo.Or:
            r = fo.disj(*(self.go(c, memo) for c in g.args))
        elif t is fo.Not:
            r = fo.neg(self.go(g.arg, memo))
        elif t is fo.Quant and g.sort == fo.POS:
            body = self.go(g.body, memo)
            d = self.dom(g.var)
            inner = fo.implies(d, body) if g.forall else fo.conj(d, body)
            for c in reversed(_coords(g.var, self.k)):
                inner = fo.quant(g.forall, fo.POS, c, inner)
            r = fo.quant(g.forall, fo.TAG, _tagvar(g.var), inner, self.tags)
        elif t is fo.Quant and g.sort == fo.BOOL:
            r = fo.quant(g.forall, fo.BOOL, g.var, self.go(g.body, memo))
        elif t in (fo.Const, fo.BoolAtom):
            r = g
        else:
            raise ValueError(f"postconditions may only use positions and booleans, not {t.__name__}")
        memo[key] = r
        return r


def _nonempty() -> fo.Formula:
    return fo.exists("z__e", fo.TRUE)


def interp_qrank(F: Interpretation) -> int:
    return F.qrank()


def pullback(F: Interpretation, psi: fo.Formula) -> fo.Formula:
    """π(F, ψ) with tag quantifiers; exact on every input word."""
    if fo.free_vars(psi):
        raise ValueError("the postcondition must be closed")
    main = _Pull(F).go(psi, {})
    # on the empty input no tuple of positions exists, so arity-0 tags are
    # invisible to `main`; the output on the empty word is fixed, use it
    at_empty = fo.eval_formula(psi, eval_interpretation(F, ""))
    if fo.eval_formula(main, "") != at_empty:
        main = fo.disj(fo.conj(_nonempty(), main), fo.conj(fo.neg(_nonempty()), fo.TRUE if at_empty else fo.FALSE))
    bound = fo.qrank(psi) * (max_arity(F) + 1) + F.qrank()
    if fo.qrank(main) > max(bound, 1 if fo.qrank(psi) else 0):
        raise BoundViolation(f"pullback quantifier rank {fo.qrank(main)} exceeds {bound}")
    return main


def naive_pullback(F: Interpretation, psi: fo.Formula) -> fo.Formula:
    """Reference pullback expanding every quantifier into a case split over tags.

    Exponential in the quantifier depth of ψ; for debugging and testing.
    """
    fresh = itertools.count()

    def go(g, env):
        t = type(g)
        if t is fo.Quant and g.sort == fo.POS:
            parts = []
            for tag in F.tags:
                a = F.arity[tag]
                cs = tuple(f"{g.var}__{next(fresh)}" for _ in range(a))
                d = fo.substitute(F.dom[tag], dict(zip(xs(a), cs)))
                body = go(g.body, {**env, g.var: (tag, cs)})
                inner = fo.implies(d, body) if g.forall else fo.conj(d, body)
                for c in reversed(cs):
                    inner = fo.quant(g.forall, fo.POS, c, inner)
                parts.append(inner)
            return fo.conj(*parts) if g.forall else fo.disj(*parts)
        if t is fo.Quant:
            return fo.quant(g.forall, g.sort, g.var, go(g.body, env), g.domain)
        if t is fo.And:
            return fo.conj(*(go(c, env) for c in g.args))
        if t is fo.Or:
            return fo.disj(*(go(c, env) for c in g.args))
        if t is fo.Not:
            return fo.neg(go(g.arg, env))
        if t is fo.PosEq:
            (t1, c1), (t2, c2) = env[g.x], env[g.y]
            return fo.conj(*(fo.pos_eq(a, b) for a, b in zip(c1, c2))) if t1 == t2 else fo.FALSE
        if t is fo.PosLt:
            (t1, c1), (t2, c2) = env[g.x], env[g.y]
            m = dict(zip(xs(len(c1)), c1))
            m.update(zip(ys(len(c2)), c2))
            le = fo.substitute(F.order[(t1, t2)], m)
            same = fo.conj(*(fo.pos_eq(a, b) for a, b in zip(c1, c2))) if t1 == t2 else fo.FALSE
            return fo.conj(le, fo.neg(same))
        if t is fo.Letter:
            tag, cs = env[g.x]
            o = F.out[tag]
            if isinstance(o, str):
                return fo.TRUE if o == g.a else fo.FALSE
            return fo.letter(cs[len(cs) - o], g.a)
        return g

    main = go(psi, {})
    at_empty = fo.eval_formula(psi, eval_interpretation(F, ""))
    if fo.eval_formula(main, "") != at_empty:
        main = fo.disj(fo.conj(_nonempty(), main), fo.conj(fo.neg(_nonempty()), fo.TRUE if at_empty else fo.FALSE))
    return main


@dataclass(eq=False)
class VerificationFormula:
    chi: fo.Formula
    pre: fo.Formula
    interp: Interpretation
    post: fo.Formula
    qrank: int
    size: int


# size(χ) <= SIZE_CONSTANT * (size(φ) + |F| * size(ψ)); measured on the corpus
SIZE_CONSTANT = 8


def build_chi(pre: fo.Formula, F: Interpretation, post: fo.Formula, naive: bool = False) -> VerificationFormula:
    """χ = φ ∧ ¬π(F, ψ): unsatisfiable iff {φ} F {ψ} holds."""
    pi = naive_pullback(F, post) if naive else pullback(F, post)
    chi = fo.conj(pre, fo.neg(pi))
    qr, sz = fo.qrank(chi), fo.size(chi)
    if not naive:
        bound = max(fo.qrank(pre), fo.qrank(post) * (max_arity(F) + 1) + F.qrank(), 1 if fo.qrank(post) else 0)
        if qr > bound:
            raise BoundViolation(f"quantifier rank of chi {qr} exceeds {bound}")
        size_bound = SIZE_CONSTANT * (fo.size(pre) + F.size() * fo.size(post))
        if sz > size_bound:
            raise BoundViolation(f"size of chi {sz} exceeds {size_bound}")
    return VerificationFormula(chi, pre, F, post, qr, sz)
