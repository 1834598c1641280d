"""First-order string-to-string interpretations and their compilation from
simple for-programs via program formulas.

A program formula relates the boolean state before a statement (variables
``b#i``) to the state after it (``b#o``), given values for the position
variables in scope.  Statements are translated compositionally; loops use
an accelerated iteration that only guesses the (at most |B|) iterations
that switch a boolean on.
"""
from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass, field
from typing import Union

from . import fo
from .errors import BoundViolation
from .simple import (
    CBin, CBool, CConst, CLabel, CNot, CPos, SFor, SIf, SimpleProgram,
    SPrintChar, SPrintLabel, SSeq, SSetTrue, SSkip, simple_letters,
)

_fresh = itertools.count()


def fresh(stem: str) -> str:
    return f"{stem}#{next(_fresh)}"


def ib(b: str) -> str:
    return f"{b}#i"


def ob(b: str) -> str:
    return f"{b}#o"


# ---------------------------------------------------------------- program formulas


@dataclass(eq=False)
class ProgramFormula:
    phi: fo.Formula
    bin: frozenset = frozenset()
    bout: frozenset = frozenset()
    pos: frozenset = frozenset()

    def check_vars(self) -> None:
        allowed = {ib(b) for b in self.bin} | {ob(b) for b in self.bout} | set(self.pos)
        extra = fo.free_vars(self.phi) - allowed
        if extra:
            raise BoundViolation(f"program formula has undeclared free variables {sorted(extra)}")


TOP = ProgramFormula(fo.TRUE)


def _pos_vars(f: fo.Formula) -> frozenset:
    return frozenset(v for v in fo.free_vars(f) if not v.endswith(("#i", "#o")))


def cond_formula(c) -> fo.Formula:
    """Translate a simple-program condition over the input booleans."""
    t = type(c)
    if t is CConst:
        return fo.TRUE if c.value else fo.FALSE
    if t is CBool:
        return fo.bvar(ib(c.name))
    if t is CNot:
        return fo.neg(cond_formula(c.arg))
    if t is CBin:
        a, b = cond_formula(c.left), cond_formula(c.right)
        return fo.conj(a, b) if c.op == "and" else fo.disj(a, b)
    if t is CLabel:
        return fo.letter(c.var, c.char)
    if t is CPos:
        x, y = c.left, c.right
        return {
            "==": lambda: fo.pos_eq(x, y), "!=": lambda: fo.neg(fo.pos_eq(x, y)),
            "<": lambda: fo.pos_lt(x, y), ">": lambda: fo.pos_lt(y, x),
            "<=": lambda: fo.pos_le(x, y), ">=": lambda: fo.pos_le(y, x),
        }[c.op]()
    raise TypeError(c)


def _cond_bools(f: fo.Formula) -> frozenset:
    return frozenset(v[:-2] for v in fo.free_vars(f) if v.endswith("#i"))


def set_true(b: str) -> ProgramFormula:
    return ProgramFormula(fo.bvar(ob(b)), bout=frozenset((b,)))


def set_false(bs) -> ProgramFormula:
    bs = frozenset(bs)
    return ProgramFormula(fo.conj(*(fo.neg(fo.bvar(ob(b))) for b in sorted(bs))), bout=bs)


def assume(c: fo.Formula) -> ProgramFormula:
    """The partial identity on states satisfying `c` (over ``b#i``)."""
    return ProgramFormula(c, bin=_cond_bools(c), pos=_pos_vars(c))


def _pad(pf: ProgramFormula, outs: frozenset) -> ProgramFormula:
    missing = sorted(outs - pf.bout)
    if not missing:
        return pf
    ids = [fo.iff(fo.bvar(ib(b)), fo.bvar(ob(b))) for b in missing]
    return ProgramFormula(fo.conj(pf.phi, *ids), pf.bin | set(missing), pf.bout | set(missing), pf.pos)


def if_formula(c: fo.Formula, p1: ProgramFormula, p2: ProgramFormula) -> ProgramFormula:
    outs = p1.bout | p2.bout
    p1, p2 = _pad(p1, outs), _pad(p2, outs)
    phi = fo.disj(fo.conj(c, p1.phi), fo.conj(fo.neg(c), p2.phi))
    return ProgramFormula(phi, p1.bin | p2.bin | _cond_bools(c), outs, p1.pos | p2.pos | _pos_vars(c))


def compose_formulas(p1: ProgramFormula, p2: ProgramFormula) -> ProgramFormula:
    """Sequential composition ``p1 ; p2``.

    Booleans written by both are routed through a fresh existentially
    quantified variable; booleans only read by `p2` after `p1` wrote them
    are read from p1's output directly.
    """
    through = sorted(p1.bout & p2.bout)
    read = p1.bout & (p2.bin - p2.bout)
    mids = {b: fresh(b) for b in through}
    f1 = fo.substitute(p1.phi, {ob(b): m for b, m in mids.items()})
    m2 = {ib(b): m for b, m in mids.items() if b in p2.bin}
    m2.update({ib(b): ob(b) for b in read})
    f2 = fo.substitute(p2.phi, m2)
    phi = fo.conj(f1, f2)
    for b in reversed(through):
        phi = fo.exists(mids[b], phi, fo.BOOL)
    out = ProgramFormula(phi, p1.bin | (p2.bin - p1.bout), p1.bout | p2.bout, p1.pos | p2.pos)
    bound = max(fo.qrank(p1.phi), fo.qrank(p2.phi)) + len(p1.bout & (p2.bin | p2.bout))
    if fo.qrank(phi) > bound:
        raise BoundViolation(f"composition quantifier rank {fo.qrank(phi)} exceeds {bound}")
    return out


def _before(a: str, b: str, backward: bool) -> fo.Formula:
    return fo.pos_lt(b, a) if backward else fo.pos_lt(a, b)


def iterate_formula(
    pf: ProgramFormula, var: str, backward: bool = False, upto: str | None = None
) -> ProgramFormula:
    """Φ*: run `pf` for every position `var` of the word, in loop order.

    With `upto`, only the positions strictly before `upto` (in loop order)
    are visited; `upto` stays free in the result.
    """
    bs = sorted(pf.bout)
    n = len(bs)
    rest_pos = (pf.pos - {var}) | ({upto} if upto else frozenset())
    if n == 0:
        # a formula without outputs is functional only if it is valid
        return ProgramFormula(fo.TRUE)
    phi = _iterate(pf, var, backward, upto, None)
    bound = fo.qrank(pf.phi) + n * n + n + 1
    if fo.qrank(phi) > bound:
        raise BoundViolation(f"iteration quantifier rank {fo.qrank(phi)} exceeds {bound}")
    return ProgramFormula(phi, pf.bin | pf.bout, pf.bout, rest_pos)


def iterate_then(pf: ProgramFormula, var: str, backward: bool, upto: str | None, k: fo.Formula) -> fo.Formula:
    """Equivalent of ``∃o. Φ*(i, o) ∧ k[i := o]`` with o guessed innermost.

    Same models as composing the iteration with `k`, but evaluation never
    enumerates final states up front.
    """
    if not pf.bout:
        return k
    return _iterate(pf, var, backward, upto, k)


def _iterate(pf, var, backward, upto, cont):
    bs = sorted(pf.bout)
    n = len(bs)

    def dom(p):
        return _before(p, upto, backward) if upto else fo.TRUE

    def inst(p, vin, vout):
        m = {var: p}
        m.update({ib(b): v for b, v in zip(bs, vin)})
        m.update({ob(b): v for b, v in zip(bs, vout)})
        return fo.substitute(pf.phi, m)

    def stable(lo, hi, vec):
        """No change strictly between lo and hi (None: word boundary)."""
        p = fresh("p")
        guard = [dom(p)]
        if lo is not None:
            guard.append(_before(lo, p, backward))
        if hi is not None:
            guard.append(_before(p, hi, backward))
        return fo.forall(p, fo.implies(fo.conj(*guard), inst(p, vec, vec)))

    def mono(j):
        # booleans only switch on: implied, but lets evaluation prune early
        return [fo.implies(fo.bvar(a), fo.bvar(b)) for a, b in zip(vecs[j - 1], vecs[j])]

    vin = [ib(b) for b in bs]
    last = [ob(b) for b in bs] if cont is None else [fresh(b) for b in bs]
    ps = [fresh("p") for _ in range(n)]
    vecs = [vin] + [[fresh(b) for b in bs] for _ in range(n - 1)] + [last]

    def step(j):
        """Transition vecs[j-1] -> vecs[j] at ps[j-1] (j is 1-based)."""
        p = ps[j - 1]
        real = inst(p, vecs[j - 1], vecs[j])
        if j == 1:
            return real
        q = ps[j - 2]
        same = fo.conj(*(fo.iff(fo.bvar(a), fo.bvar(b)) for a, b in zip(vecs[j - 1], vecs[j])))
        return fo.disj(fo.conj(_before(q, p, backward), real), fo.conj(fo.pos_eq(q, p), same))

    # innermost block: last step and the stability after it
    body = fo.conj(dom(ps[n - 1]), stable(ps[n - 2] if n > 1 else None, ps[n - 1], vecs[n - 1]),
                   step(n), stable(ps[n - 1], None, vecs[n]))
    if cont is not None:
        body = fo.conj(*mono(n), body, fo.substitute(cont, dict(zip(vin, last))))
        for v in reversed(last):
            body = fo.exists(v, body, fo.BOOL)
    body = fo.exists(ps[n - 1], body)
    for j in range(n - 1, 0, -1):
        lo = ps[j - 2] if j > 1 else None
        inner = fo.conj(dom(ps[j - 1]), stable(lo, ps[j - 1], vecs[j - 1]), *mono(j), step(j), body)
        for v in reversed(vecs[j]):
            inner = fo.exists(v, inner, fo.BOOL)
        body = fo.exists(ps[j - 1], inner)
    q = fresh("p")
    nothing = fo.neg(fo.exists(q, dom(q)))
    if cont is None:
        empty = fo.conj(nothing, *(fo.iff(fo.bvar(a), fo.bvar(b)) for a, b in zip(vin, last)))
    else:
        empty = fo.conj(nothing, cont)
    return fo.disj(empty, body)


def _uniquify(sp: SimpleProgram) -> SimpleProgram:
    """Rename loop variables and loop-local booleans apart."""
    ctr = itertools.count()

    def cond(c, env):
        t = type(c)
        if t is CBool:
            return CBool(env.get(("b", c.name), c.name))
        if t is CNot:
            return CNot(cond(c.arg, env))
        if t is CBin:
            return CBin(c.op, cond(c.left, env), cond(c.right, env))
        if t is CLabel:
            return CLabel(env[c.var], c.char)
        if t is CPos:
            return CPos(c.op, env[c.left], env[c.right])
        return c

    def go(s, env):
        t = type(s)
        if t is SSeq:
            return SSeq(tuple(go(x, env) for x in s.stmts))
        if t is SIf:
            return SIf(cond(s.cond, env), go(s.then, env), go(s.els, env))
        if t is SFor:
            env2 = dict(env)
            k = next(ctr)
            env2[s.var] = f"l#{k}"
            bools = []
            for b in s.bools:
                nb = f"{b}#{k}"
                env2[("b", b)] = nb
                bools.append(nb)
            return SFor(env2[s.var], s.backward, tuple(bools), go(s.body, env2))
        if t is SSetTrue:
            return SSetTrue(env.get(("b", s.name), s.name))
        if t is SPrintLabel:
            return SPrintLabel(env[s.var])
        return s

    return SimpleProgram(sp.bools, go(sp.body, {}))


def stmt_program_formula(s, cache: dict | None = None) -> ProgramFormula:
    """Program formula of a statement (loop variables must be named apart)."""
    if cache is None:
        cache = {}
    key = ("stmt", id(s))
    if key in cache:
        return cache[key][1]
    t = type(s)
    if t in (SSkip, SPrintChar, SPrintLabel):
        r = TOP
    elif t is SSetTrue:
        r = set_true(s.name)
    elif t is SSeq:
        r = functools.reduce(compose_formulas, (stmt_program_formula(x, cache) for x in s.stmts), TOP)
    elif t is SIf:
        c = cond_formula(s.cond)
        r = if_formula(c, stmt_program_formula(s.then, cache), stmt_program_formula(s.els, cache))
    elif t is SFor:
        r = iterate_formula(loop_body_formula(s, cache), s.var, s.backward)
    else:
        raise TypeError(s)
    cache[key] = (s, r)
    return r


def loop_body_formula(s: SFor, cache: dict | None = None) -> ProgramFormula:
    """One iteration: local booleans start false and are forgotten afterwards."""
    if cache is None:
        cache = {}
    key = ("body", id(s))
    if key in cache:
        return cache[key][1]
    body = stmt_program_formula(s.body, cache)
    if s.bools:
        pf = compose_formulas(set_false(s.bools), body)
        phi = pf.phi
        for b in s.bools:
            if b in pf.bout:
                phi = fo.exists(ob(b), phi, fo.BOOL)
        local = frozenset(s.bools)
        body = ProgramFormula(phi, pf.bin - local, pf.bout - local, pf.pos)
    cache[key] = (s, body)
    return body


# ---------------------------------------------------------------- interpretations


@dataclass(eq=False)
class Interpretation:
    """Tags with arities, output letters/indices, domain and order formulas.

    dom[t] has free variables x1..xk (k = arity[t]); order[(t, u)] has free
    variables x1..xk and y1..ym.  out[t] is a letter or a 1-based index into
    the tuple.
    """

    letters: frozenset
    tags: tuple
    arity: dict
    out: dict
    dom: dict
    order: dict
    paths: dict = field(default_factory=dict)
    dom_eval: dict = field(default_factory=dict)

    def formulas(self):
        yield from self.dom.values()
        yield from self.order.values()

    def qrank(self) -> int:
        return max((fo.qrank(f) for f in self.formulas()), default=0)

    def size(self) -> int:
        return sum(fo.size(f) for f in self.formulas())


def xs(k: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, k + 1))


def ys(k: int) -> tuple[str, ...]:
    return tuple(f"y{i}" for i in range(1, k + 1))


class NotTotal(Exception):
    pass


def _compiled(I: Interpretation, forward: bool):
    cache = I.__dict__.setdefault("_compiled_cache", {})
    if forward not in cache:
        doms = I.dom_eval if forward else {}
        items = [(doms.get(t, I.dom[t]), xs(I.arity[t])) for t in I.tags]
        pairs = [(a, b) for a in I.tags for b in I.tags]
        items += [(I.order[(a, b)], xs(I.arity[a]) + ys(I.arity[b])) for a, b in pairs]
        cf = fo.CompiledFormulas(items)
        dfs = {t: cf.fn(k) for k, t in enumerate(I.tags)}
        ofs = {ab: cf.fn(len(I.tags) + k) for k, ab in enumerate(pairs)}
        cache[forward] = (cf, dfs, ofs)
    return cache[forward]


EVAL_MODES = ("forward", "relational", "interpreted")


def eval_interpretation(I: Interpretation, w: str, mode: str = "forward", check_total: int = 64) -> str:
    """Output of `I` on `w`; empty if the order is not total on the survivors.

    `mode` selects the domain formulas and evaluator: the compiled forward
    variant (fast), the compiled relational formulas, or a direct
    interpretation of the relational formulas (slowest, simplest).  All
    pairs are checked for totality when at most `check_total` elements
    survive, consecutive pairs otherwise.
    """
    n = len(w)
    if mode == "interpreted":
        model = fo.WordModel(w)

        def dom(t, tup):
            return model._ev(I.dom[t], dict(zip(xs(len(tup)), tup)))

        def le(a, b) -> bool:
            env = dict(zip(xs(len(a[1])), a[1]))
            env.update(zip(ys(len(b[1])), b[1]))
            return model._ev(I.order[(a[0], b[0])], env)
    else:
        if mode not in EVAL_MODES:
            raise ValueError(f"unknown mode {mode!r}")
        cf, doms, orders = _compiled(I, mode == "forward")
        cf.set_word(w)

        def dom(t, tup):
            return doms[t](*tup)

        def le(a, b) -> bool:
            return orders[(a[0], b[0])](*a[1], *b[1])

    elems = [
        (t, tup)
        for t in I.tags
        for tup in itertools.product(range(n), repeat=I.arity[t])
        if dom(t, tup)
    ]

    def cmp(a, b) -> int:
        if a == b:
            return 0
        ab, ba = le(a, b), le(b, a)
        if ab == ba:
            raise NotTotal
        return -1 if ab else 1

    try:
        elems.sort(key=functools.cmp_to_key(cmp))
        if len(elems) <= check_total:
            for i, a in enumerate(elems):
                if not le(a, a):
                    raise NotTotal
                for b in elems[i + 1:]:
                    if not le(a, b) or le(b, a):
                        raise NotTotal
    except NotTotal:
        return ""
    out = []
    for t, tup in elems:
        o = I.out[t]
        out.append(o if isinstance(o, str) else w[tup[len(tup) - o]])
    return "".join(out)


def compile_interpretation(sp: SimpleProgram) -> Interpretation:
    """Interpretation with one tag per print statement of `sp`.

    The domain formula of a print composes the program formulas of all code
    executed before it (loops contribute the iteration up to the current
    position) with the branch conditions leading to it, then quantifies the
    resulting booleans.  An equivalent "forward" variant of each domain
    formula, which guesses boolean states in execution order, is kept in
    `dom_eval` for fast evaluation.
    """
    sp = _uniquify(sp)
    cache: dict = {}
    tags: list[str] = []
    arity, out, dom, dom_eval, loops_of, paths = {}, {}, {}, {}, {}, {}

    def step_of(x):
        if isinstance(x, SFor):
            return ("loop", loop_body_formula(x, cache), x.var, x.backward, None)
        return ("pf", stmt_program_formula(x, cache))

    def visit(s, steps: tuple, loops: list, path: tuple):
        t = type(s)
        if t is SSeq:
            for k, x in enumerate(s.stmts):
                visit(x, steps, loops, path + (k,))
                steps = steps + (step_of(x),)
        elif t is SIf:
            c = cond_formula(s.cond)
            visit(s.then, steps + (("assume", c),), loops, path + (0,))
            visit(s.els, steps + (("assume", fo.neg(c)),), loops, path + (1,))
        elif t is SFor:
            pre = steps + (("loop", loop_body_formula(s, cache), s.var, s.backward, s.var),)
            if s.bools:
                pre = pre + (("reset", s.bools),)
            visit(s.body, pre, loops + [s], path + (0,))
        elif t in (SPrintChar, SPrintLabel):
            tag = f"t{len(tags)}"
            tags.append(tag)
            k = len(loops)
            arity[tag] = k
            names = [l.var for l in loops]
            out[tag] = s.char if t is SPrintChar else k - names.index(s.var)
            rename = dict(zip(names, xs(k)))
            dom[tag] = fo.substitute(_relational_dom(steps), rename)
            dom_eval[tag] = fo.substitute(_forward_dom(steps), rename)
            loops_of[tag] = loops
            paths[tag] = path

    visit(sp.body, (), [], ())
    order = {}
    for a in tags:
        for b in tags:
            order[(a, b)] = _order_formula(a, b, loops_of, paths)
    return Interpretation(
        frozenset(simple_letters(sp)), tuple(tags), arity, out, dom, order, paths, dom_eval
    )


def _relational_dom(steps) -> fo.Formula:
    prefix = TOP
    for st in steps:
        if st[0] == "pf":
            pf = st[1]
        elif st[0] == "loop":
            pf = iterate_formula(st[1], st[2], st[3], upto=st[4])
        elif st[0] == "assume":
            pf = assume(st[1])
        else:
            pf = set_false(st[1])
        prefix = compose_formulas(prefix, pf)
    phi = fo.substitute(prefix.phi, {ib(b): fo.FALSE for b in prefix.bin})
    for b in sorted(prefix.bout):
        phi = fo.exists(ob(b), phi, fo.BOOL)
    return phi


def _forward_dom(steps) -> fo.Formula:
    k = fo.TRUE
    for st in reversed(steps):
        if st[0] == "pf":
            pf = st[1]
            outs = sorted(pf.bout)
            mids = [fresh(b) for b in outs]
            k = fo.conj(
                fo.substitute(pf.phi, {ob(b): m for b, m in zip(outs, mids)}),
                fo.substitute(k, {ib(b): m for b, m in zip(outs, mids)}),
            )
            for m in reversed(mids):
                k = fo.exists(m, k, fo.BOOL)
        elif st[0] == "loop":
            k = iterate_then(st[1], st[2], st[3], st[4], k)
        elif st[0] == "assume":
            k = fo.conj(st[1], k)
        else:
            k = fo.substitute(k, {ib(b): fo.FALSE for b in st[1]})
    return fo.substitute(k, {v: fo.FALSE for v in fo.free_vars(k) if v.endswith("#i")})


def _order_formula(a, b, loops_of, paths) -> fo.Formula:
    la, lb = loops_of[a], loops_of[b]
    m = 0
    while m < min(len(la), len(lb)) and la[m] is lb[m]:
        m += 1
    x, y = xs(len(la)), ys(len(lb))
    disjuncts = []
    for k in range(m):
        eqs = [fo.pos_eq(x[j], y[j]) for j in range(k)]
        disjuncts.append(fo.conj(*eqs, _before(x[k], y[k], la[k].backward)))
    if a == b or paths[a] < paths[b]:
        disjuncts.append(fo.conj(*(fo.pos_eq(x[j], y[j]) for j in range(m))))
    return fo.disj(*disjuncts)


def identity_interpretation() -> Interpretation:
    return Interpretation(frozenset(), ("copy",), {"copy": 1}, {"copy": 1},
                          {"copy": fo.TRUE}, {("copy", "copy"): fo.pos_le("x1", "y1")})


OutSpec = Union[str, int]


# ---------------------------------------------------------------- text format


def show_interpretation(I: Interpretation) -> str:
    """Line-based text; formulas are written in the spec language."""
    lines = ["interpretation"]
    if I.letters:
        lines.append("letters " + " ".join(fo._q(c) for c in sorted(I.letters)))
    for t in I.tags:
        o = I.out[t]
        lines.append(f"tag {t} arity {I.arity[t]} out {fo._q(o) if isinstance(o, str) else o}")
    for t in I.tags:
        lines.append(f"dom {t} := {fo.to_dsl(I.dom[t])}")
    for a in I.tags:
        for b in I.tags:
            lines.append(f"order {a} {b} := {fo.to_dsl(I.order[(a, b)])}")
    return "\n".join(lines) + "\n"


def parse_interpretation(text: str) -> Interpretation:
    from .errors import ParseError
    from .specdsl import _unescape, parse_formula

    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0].strip() != "interpretation":
        raise ParseError("expected 'interpretation' header")
    letters: set[str] = set()
    tags, arity, out, dom, order = [], {}, {}, {}, {}
    for n, ln in enumerate(lines[1:], start=2):
        head, _, rest = ln.partition(":=")
        words = head.split()
        try:
            if words[0] == "letters":
                letters |= {_unescape(c[1:-1]) for c in re.findall(r"'(?:\\u\{[0-9a-fA-F]+\}|\\.|[^'\\])'", head)}
            elif words[0] == "tag":
                t = words[1]
                tags.append(t)
                arity[t] = int(words[3])
                o = head.split(" out ", 1)[1].strip()
                out[t] = _unescape(o[1:-1]) if o.startswith("'") else int(o)
            elif words[0] == "dom":
                dom[words[1]] = parse_formula(rest)
            elif words[0] == "order":
                order[(words[1], words[2])] = parse_formula(rest)
            else:
                raise ParseError(f"line {n}: unknown item {words[0]!r}")
        except (IndexError, ValueError) as e:
            raise ParseError(f"line {n}: malformed {words[0] if words else 'line'} ({e})") from None
    for t in tags:
        if t not in dom:
            raise ParseError(f"missing dom for tag {t}")
        for u in tags:
            if (t, u) not in order:
                raise ParseError(f"missing order for tags {t} {u}")
    return Interpretation(frozenset(letters), tuple(tags), arity, out, dom, order)
