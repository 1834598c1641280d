"""Rewriting passes A to H: high-level programs to simple for-programs.

Every pass maps a program to a program that the reference interpreter can
still run, so each step can be checked in isolation.  Fresh names use the
reserved ``__`` prefix, which the surface parser rejects.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from . import hl_ast as A
from . import simple as S
from .errors import RewriteError
from .typecheck import TypedProgram, check_verifiable, typecheck_program


class Fresh:
    def __init__(self):
        self.n = 0
        self.made: list[str] = []

    def __call__(self, base: str = "v") -> str:
        self.n += 1
        stem = re.sub(r"^_+|\d+$", "", base) or "v"
        name = f"__{stem}{self.n}"
        self.made.append(name)
        return name


# ---------------------------------------------------------------- utilities


def node_count(node) -> int:
    return sum(1 for _ in A.iter_nodes(node))


def is_bexpr(e) -> bool:
    return isinstance(e, (A.BConst, A.BVar, A.BNot, A.BBin, A.PosCmp, A.BCall, A.LitEq, A.BoolGen))


def b_and(a, b):
    if a == A.BConst(True):
        return b
    if b == A.BConst(True):
        return a
    if A.BConst(False) in (a, b):
        return A.BConst(False)
    return A.BBin("and", a, b)


def b_or(a, b):
    if a == A.BConst(False):
        return b
    if b == A.BConst(False):
        return a
    if A.BConst(True) in (a, b):
        return A.BConst(True)
    return A.BBin("or", a, b)


def b_not(a):
    if isinstance(a, A.BConst):
        return A.BConst(not a.value)
    return A.BNot(a)


def subst(node, m: dict, fresh: Fresh | None = None):
    """Substitute free names in `node`; with `fresh`, also rename binders.

    `m` maps a name to a `str` (renaming), an `OExpr` (for list/char
    variables) or an `Addr` (for position variables).
    """
    t = type(node)
    if t is A.Var:
        r = m.get(node.name)
        if r is None:
            return node
        return A.Var(r, span=node.span) if isinstance(r, str) else r
    if t is A.Const or t is A.BConst or t is A.Skip:
        return node
    if t is A.BVar:
        r = m.get(node.name)
        return A.BVar(r, span=node.span) if isinstance(r, str) else node
    if t is A.SetTrue:
        r = m.get(node.name)
        return A.SetTrue(r, span=node.span) if isinstance(r, str) else node
    if t is A.PosCmp:
        return replace(node, left=_subst_pos(node.left, m), right=_subst_pos(node.right, m))
    if t is A.Arg:
        pos = []
        for p in node.positions:
            r = m.get(p, p)
            if not isinstance(r, str):
                raise RewriteError("InternalError", "address passed as a call argument")
            pos.append(r)
        return A.Arg(subst(node.expr, m, fresh), tuple(pos), span=node.span)
    if t is A.For:
        it = subst(node.iter, m, fresh)
        m2 = dict(m)
        pos, elem = node.pos, node.elem
        if fresh:
            pos, elem = fresh(pos), fresh(elem)
            m2[node.pos], m2[node.elem] = pos, elem
        else:
            m2.pop(pos, None)
            m2.pop(elem, None)
        return A.For(pos, elem, it, subst(node.body, m2, fresh), node.backward, span=node.span)
    if t is A.LetBool:
        m2 = dict(m)
        name = node.name
        if fresh:
            name = m2[node.name] = fresh(node.name)
        else:
            m2.pop(name, None)
        return A.LetBool(name, subst(node.body, m2, fresh), span=node.span)
    if t is A.LetOut:
        ex = subst(node.expr, m, fresh)
        m2 = dict(m)
        name = node.name
        if fresh:
            name = m2[node.name] = fresh(node.name)
        else:
            m2.pop(name, None)
        return A.LetOut(name, ex, subst(node.body, m2, fresh), span=node.span)
    if t is A.Seq:
        return A.Seq(tuple(subst(x, m, fresh) for x in node.stmts), span=node.span)
    if t is A.If:
        return A.If(subst(node.cond, m, fresh), subst(node.then, m, fresh), subst(node.els, m, fresh), span=node.span)
    if t is A.Yield or t is A.Return:
        return t(subst(node.expr, m, fresh), span=node.span)
    if t is A.OList:
        return A.OList(tuple(subst(x, m, fresh) for x in node.items), span=node.span)
    if t is A.Call or t is A.BCall:
        return t(node.fname, tuple(subst(a, m, fresh) for a in node.args), span=node.span)
    if t is A.ListGen:
        return A.ListGen(subst(node.body, m, fresh), node.depth, span=node.span)
    if t is A.BoolGen:
        return A.BoolGen(subst(node.body, m, fresh), span=node.span)
    if t is A.BNot:
        return A.BNot(subst(node.arg, m, fresh), span=node.span)
    if t is A.BBin:
        return A.BBin(node.op, subst(node.left, m, fresh), subst(node.right, m, fresh), span=node.span)
    if t is A.LitEq:
        return A.LitEq(subst(node.left, m, fresh), subst(node.right, m, fresh), span=node.span)
    if t is A.Assign:
        return node
    raise TypeError(f"subst: unexpected {t.__name__}")


def _subst_pos(term, m):
    if isinstance(term, A.Addr):
        return A.Addr(term.site, tuple((l, b, _subst_pos(v, m)) for l, b, v in term.coords))
    r = m.get(term)
    if r is None:
        return term
    if isinstance(r, (str, A.Addr)):
        return r
    raise RewriteError("InternalError", f"position {term!r} mapped to a list expression")


def freshen(node, fresh: Fresh):
    return subst(node, {}, fresh)


class Pass:
    """Identity traversal; passes override the handlers they need."""

    def __init__(self, fresh: Fresh):
        self.fresh = fresh

    def stmt(self, s):
        t = type(s)
        if t is A.Seq:
            return A.seq(*(self.stmt(x) for x in s.stmts))
        if t is A.If:
            return A.If(self.bexpr(s.cond), self.stmt(s.then), self.stmt(s.els), span=s.span)
        if t is A.For:
            return A.For(s.pos, s.elem, self.oexpr(s.iter), self.stmt(s.body), s.backward, span=s.span)
        if t is A.Yield:
            return A.Yield(self.oexpr(s.expr), span=s.span)
        if t is A.Return:
            e = s.expr
            return A.Return(self.bexpr(e) if is_bexpr(e) else self.oexpr(e), span=s.span)
        if t is A.LetOut:
            return A.LetOut(s.name, self.oexpr(s.expr), self.stmt(s.body), span=s.span)
        if t is A.LetBool:
            return A.LetBool(s.name, self.stmt(s.body), span=s.span)
        return s

    def oexpr(self, e):
        t = type(e)
        if t is A.Call:
            return A.Call(e.fname, tuple(self.arg(a) for a in e.args), span=e.span)
        if t is A.OList:
            return A.OList(tuple(self.oexpr(x) for x in e.items), span=e.span)
        if t is A.ListGen:
            return A.ListGen(self.stmt(e.body), e.depth, span=e.span)
        return e

    def arg(self, a):
        return A.Arg(self.oexpr(a.expr), a.positions, span=a.span)

    def bexpr(self, e):
        t = type(e)
        if t is A.BNot:
            return A.BNot(self.bexpr(e.arg), span=e.span)
        if t is A.BBin:
            return A.BBin(e.op, self.bexpr(e.left), self.bexpr(e.right), span=e.span)
        if t is A.BCall:
            return A.BCall(e.fname, tuple(self.arg(a) for a in e.args), span=e.span)
        if t is A.LitEq:
            return A.LitEq(self.oexpr(e.left), self.oexpr(e.right), span=e.span)
        if t is A.BoolGen:
            return A.BoolGen(self.stmt(e.body), span=e.span)
        return e

    def function(self, f: A.Function) -> A.Function:
        return replace(f, body=self.stmt(f.body))

    def program(self, p: A.Program) -> A.Program:
        return replace(p, functions=tuple(self.function(f) for f in p.functions))


def _returns(s, tail: bool):
    """(Return node, in tail position?) pairs, not descending into generators."""
    if isinstance(s, A.Return):
        yield s, tail
    elif isinstance(s, A.Seq):
        for k, x in enumerate(s.stmts):
            yield from _returns(x, tail and k == len(s.stmts) - 1)
    elif isinstance(s, A.If):
        yield from _returns(s.then, tail)
        yield from _returns(s.els, tail)
    elif isinstance(s, (A.LetBool, A.LetOut)):
        yield from _returns(s.body, tail)
    elif isinstance(s, A.For):
        yield from _returns(s.body, False)


def _map_local(s, fn):
    """Rebuild `s` applying `fn` to Return/Yield statements outside generators."""
    if isinstance(s, (A.Return, A.Yield)):
        return fn(s)
    if isinstance(s, A.Seq):
        return A.seq(*(_map_local(x, fn) for x in s.stmts))
    if isinstance(s, A.If):
        return replace(s, then=_map_local(s.then, fn), els=_map_local(s.els, fn))
    if isinstance(s, (A.LetBool, A.LetOut)):
        return replace(s, body=_map_local(s.body, fn))
    if isinstance(s, A.For):
        return replace(s, body=_map_local(s.body, fn))
    return s


# ---------------------------------------------------------------- pass A


class ElimLiteralEqualities(Pass):
    """A: `e === "ab"` becomes a call to a synthesized checker."""

    def __init__(self, fresh):
        super().__init__(fresh)
        self.made: dict = {}
        self.defs: list[A.Function] = []

    def checker(self, c: A.CList) -> str:
        if c in self.made:
            return self.made[c]
        depth = A.cdepth(c)
        items = c.items
        elem_tests = []
        for x in items:
            if isinstance(x, A.CChar):
                elem_tests.append(A.LitEq(A.Var("__y"), A.Const(x)))
            else:
                elem_tests.append(A.BCall(self.checker(x), (A.Arg(A.Var("__y")),)))
        name = self.fresh("eq")
        seen = [f"__seen{k + 1}" for k in range(len(items))]
        chain: A.Stmt = A.SetTrue("__bad")
        for k in reversed(range(len(items))):
            step = A.seq(
                A.SetTrue(seen[k]),
                A.If(A.BNot(elem_tests[k]), A.SetTrue("__bad"), A.Skip()),
            )
            chain = A.If(A.BNot(A.BVar(seen[k])), step, chain)
        ok = A.BNot(A.BVar("__bad"))
        if seen:
            ok = A.BBin("and", A.BVar(seen[-1]), ok)
        body: A.Stmt = A.seq(
            A.For("__i", "__y", A.Var("__x"), chain),
            A.If(ok, A.Return(A.BConst(True)), A.Skip()),
            A.Return(A.BConst(False)),
        )
        body = A.LetBool("__bad", body)
        for s in reversed(seen):
            body = A.LetBool(s, body)
        self.defs.append(A.Function(name, (A.Param("__x", A.TOut(depth)),), A.TBool(), body))
        self.made[c] = name
        return name

    def bexpr(self, e):
        if isinstance(e, A.LitEq):
            left, right = self.oexpr(e.left), self.oexpr(e.right)
            for const, other in ((left, right), (right, left)):
                if isinstance(const, A.Const) and isinstance(const.value, A.CList):
                    return A.BCall(self.checker(const.value), (A.Arg(other),), span=e.span)
            return A.LitEq(left, right, span=e.span)
        return super().bexpr(e)

    def program(self, p):
        p = super().program(p)
        return replace(p, functions=tuple(self.defs) + p.functions)


# ---------------------------------------------------------------- pass B


class ElimLiteralProductions(Pass):
    """B: list constants become calls to producer functions."""

    def __init__(self, fresh):
        super().__init__(fresh)
        self.made: dict = {}
        self.defs: list[A.Function] = []
        self.types: dict = {}

    def producer(self, c: A.CList) -> str:
        if c in self.made:
            return self.made[c]
        ys = []
        for x in c.items:
            if isinstance(x, A.CChar):
                ys.append(A.Yield(A.Const(x)))
            else:
                ys.append(A.Yield(A.Call(self.producer(x), ())))
        name = self.fresh("lit")
        self.defs.append(A.Function(name, (), A.TOut(A.cdepth(c)), A.seq(*ys)))
        self.made[c] = name
        return name

    def oexpr(self, e):
        if isinstance(e, A.Const) and isinstance(e.value, A.CList):
            return A.Call(self.producer(e.value), (), span=e.span)
        if isinstance(e, A.OList):
            depth = self.types[id(e)].depth
            return A.ListGen(A.seq(*(A.Yield(self.oexpr(x)) for x in e.items)), depth, span=e.span)
        return super().oexpr(e)

    def program(self, p):
        self.types = typecheck_program(p, relaxed=True).types
        p = super().program(p)
        return replace(p, functions=tuple(self.defs) + p.functions)


# ---------------------------------------------------------------- pass C


class ElimFunctionCalls(Pass):
    """C: every call is replaced by a generator over the callee's body."""

    def __init__(self, fresh):
        super().__init__(fresh)
        self.bodies: dict[str, A.Function] = {}

    def inline(self, fname, args):
        f = self.bodies[fname]
        body = freshen(f.body, self.fresh)
        m: dict = {}
        for prm, a in zip(f.params, args):
            m[prm.name] = self.oexpr(a.expr)
            for name, pos in zip(prm.positions, a.positions):
                m[name] = pos
        body = subst(body, m)
        return body, f.ret

    def oexpr(self, e):
        if isinstance(e, A.Call):
            body, ret = self.inline(e.fname, e.args)
            return A.ListGen(body, ret.depth, span=e.span)
        return super().oexpr(e)

    def bexpr(self, e):
        if isinstance(e, A.BCall):
            body, _ = self.inline(e.fname, e.args)
            return A.BoolGen(body, span=e.span)
        return super().bexpr(e)

    def program(self, p):
        for f in p.functions:
            self.bodies[f.name] = self.function(f)
        return replace(p, functions=(self.bodies[p.main],))


# ---------------------------------------------------------------- pass D


class ElimBooleanGenerators(Pass):
    """D: `if <s> then ...` becomes a flag computed by an inlined copy of s."""

    def stmt(self, s):
        if isinstance(s, A.If) and A.contains_generators(s.cond) and any(
            isinstance(n, A.BoolGen) for n in A.iter_nodes(s.cond)
        ):
            prelude = []
            flags = []
            cond = self.lift(s.cond, prelude, flags)
            out = A.seq(*prelude, A.If(self.bexpr(cond), self.stmt(s.then), self.stmt(s.els), span=s.span))
            for fl in reversed(flags):
                out = A.LetBool(fl, out)
            return out
        return super().stmt(s)

    def lift(self, e, prelude, flags):
        """Replace top-level boolean generators of `e` by fresh flags."""
        if isinstance(e, A.BoolGen):
            flag = self.fresh("b")
            flags.append(flag)
            prelude.append(self.stmt(self.flag_body(e.body, flag)))
            return A.BVar(flag, span=e.span)
        if isinstance(e, A.BNot):
            return A.BNot(self.lift(e.arg, prelude, flags), span=e.span)
        if isinstance(e, A.BBin):
            return A.BBin(e.op, self.lift(e.left, prelude, flags), self.lift(e.right, prelude, flags), span=e.span)
        return e

    def flag_body(self, body, flag):
        def norm(r):
            if isinstance(r, A.Return) and not isinstance(r.expr, A.BConst):
                return A.If(r.expr, A.Return(A.BConst(True)), A.Return(A.BConst(False)), span=r.span)
            return r

        body = _map_local(body, norm)
        guard = any(not tail and not r.expr.value for r, tail in _returns(body, True))
        if not guard:
            return _map_local(body, lambda r: A.SetTrue(flag) if r.expr.value else A.Skip())
        done = self.fresh("done")

        def conv(r):
            if r.expr.value:
                return A.seq(A.If(A.BNot(A.BVar(done)), A.SetTrue(flag), A.Skip()), A.SetTrue(done))
            return A.SetTrue(done)

        return A.LetBool(done, _map_local(body, conv))


# ---------------------------------------------------------------- pass E


class ElimLetOutput(Pass):
    """E: `let x := e in s` becomes s[x := e]."""

    def stmt(self, s):
        if isinstance(s, A.LetOut):
            return self.stmt(subst(s.body, {s.name: self.oexpr(s.expr)}))
        return super().stmt(s)


# ---------------------------------------------------------------- pass F


class ElimReturns(Pass):
    """F: list-valued returns become copy loops guarded by a flag."""

    def function(self, f):
        return replace(f, body=self.body(f.body))

    def body(self, s):
        s = self.stmt(s)
        rets = list(_returns(s, True))
        if not rets:
            return s
        if all(tail for _, tail in rets):
            return _map_local(s, lambda r: self.copy(r.expr) if isinstance(r, A.Return) else r)
        hr = self.fresh("has_returned")
        live = A.BNot(A.BVar(hr))

        def conv(r):
            if isinstance(r, A.Yield):
                return A.If(live, r, A.Skip())
            return A.seq(A.If(live, self.copy(r.expr), A.Skip()), A.SetTrue(hr))

        return A.LetBool(hr, _map_local(s, conv))

    def copy(self, e):
        i, x = self.fresh("i"), self.fresh("x")
        return A.For(i, x, e, A.Yield(A.Var(x)))

    def stmt(self, s):
        if isinstance(s, A.Yield) and isinstance(s.expr, A.ListGen) and s.expr.depth == 0:
            return self.char_yield(s.expr.body)
        return super().stmt(s)

    def char_yield(self, body):
        """`yield <s>` for a character generator: yield what s returns."""
        body = self.stmt(body)
        rets = list(_returns(body, True))
        if all(tail for _, tail in rets):
            return _map_local(body, lambda r: self.stmt(A.Yield(r.expr, span=r.span)))
        done = self.fresh("done")
        return A.LetBool(done, _map_local(body, lambda r: A.seq(
            A.If(A.BNot(A.BVar(done)), self.stmt(A.Yield(r.expr)), A.Skip()),
            A.SetTrue(done),
        )))

    def oexpr(self, e):
        if isinstance(e, A.ListGen):
            if e.depth == 0:
                raise RewriteError(
                    "ReturnDepthZero", "a character-valued call can only be yielded", e.span
                )
            return A.ListGen(self.body(e.body), e.depth, span=e.span)
        return super().oexpr(e)


# ---------------------------------------------------------------- pass G


def _sites(s, path=(), loops=()):
    """Yield statements of `s` outside generators: (path, loop coords, stmt)."""
    if isinstance(s, A.Yield):
        yield path, loops, s
    elif isinstance(s, A.Seq):
        for k, x in enumerate(s.stmts):
            yield from _sites(x, path + (k,), loops)
    elif isinstance(s, A.If):
        yield from _sites(s.then, path + (0,), loops)
        yield from _sites(s.els, path + (1,), loops)
    elif isinstance(s, (A.LetBool, A.LetOut)):
        yield from _sites(s.body, path + (0,), loops)
    elif isinstance(s, A.For):
        yield from _sites(s.body, path + (0,), loops + ((path, s.backward, s.pos),))


def _replace_sites(s, fn, path=(), loops=()):
    if isinstance(s, A.Yield):
        return fn(path, loops, s)
    if isinstance(s, A.Seq):
        return A.seq(*(_replace_sites(x, fn, path + (k,), loops) for k, x in enumerate(s.stmts)))
    if isinstance(s, A.If):
        return replace(s, then=_replace_sites(s.then, fn, path + (0,), loops),
                       els=_replace_sites(s.els, fn, path + (1,), loops))
    if isinstance(s, (A.LetBool, A.LetOut)):
        return replace(s, body=_replace_sites(s.body, fn, path + (0,), loops))
    if isinstance(s, A.For):
        return replace(s, body=_replace_sites(s.body, fn, path + (0,), loops + ((path, s.backward, s.pos),)))
    return s


class ExpandLoops(Pass):
    """G: loops over generators are unfolded into their producing statement.

    The index of an unfolded loop is replaced by a symbolic address (yield
    site plus the values of the enclosing loop variables); address
    comparisons are finally lowered to plain position comparisons.
    """

    def stmt(self, s):
        if isinstance(s, A.For) and isinstance(s.iter, A.ListGen):
            return self.stmt(self.expand(s))
        return super().stmt(s)

    def plug(self, s2, x, i, e, addr):
        return freshen(subst(s2, {x: e, i: addr}), self.fresh)

    def expand(self, loop: A.For):
        s1 = freshen(loop.iter.body, self.fresh)
        if not loop.backward:
            return _replace_sites(
                s1, lambda site, coords, y: self.plug(loop.body, loop.elem, loop.pos, y.expr, A.Addr(site, coords))
            )
        return self.rev(s1, s1, loop, (), ())

    def rev(self, s, s1, loop, path, coords):
        """s_rev: reach every yield of s in reverse order (booleans and tests dropped)."""
        if isinstance(s, A.Yield):
            outer = A.Addr(path, coords)

            def inner_yield(site, inner_coords, y):
                if site != path:
                    return A.Skip()
                guard = A.PosCmp("==", A.Addr(site, inner_coords), outer)
                return A.If(guard, self.plug(loop.body, loop.elem, loop.pos, y.expr, outer), A.Skip())

            return _replace_sites(freshen(s1, self.fresh), inner_yield)
        if isinstance(s, A.Seq):
            parts = [self.rev(x, s1, loop, path + (k,), coords) for k, x in enumerate(s.stmts)]
            return A.seq(*reversed(parts))
        if isinstance(s, A.If):
            return A.seq(
                self.rev(s.els, s1, loop, path + (1,), coords),
                self.rev(s.then, s1, loop, path + (0,), coords),
            )
        if isinstance(s, (A.LetBool, A.LetOut)):
            return self.rev(s.body, s1, loop, path + (0,), coords)
        if isinstance(s, A.For):
            body = self.rev(s.body, s1, loop, path + (0,), coords + ((path, s.backward, s.pos),))
            return A.For(s.pos, s.elem, s.iter, body, not s.backward, span=s.span)
        return A.Skip()

    def oexpr(self, e):
        # generators are expanded only once they are iterated over
        return e

    def program(self, p):
        p = super().program(p)
        return LowerAddresses(self.fresh).program(p)


def addr_eq_formula(a, b):
    if isinstance(a, str) and isinstance(b, str):
        return A.PosCmp("==", a, b)
    if isinstance(a, str) or isinstance(b, str):
        raise RewriteError("InternalError", "comparing a plain position with an address")
    if a.site != b.site or len(a.coords) != len(b.coords):
        return A.BConst(False)
    out = A.BConst(True)
    for (_, _, va), (_, _, vb) in zip(a.coords, b.coords):
        out = b_and(out, addr_eq_formula(va, vb))
    return out


def addr_lt_formula(a, b):
    """Output at address a strictly precedes output at address b."""
    if isinstance(a, str) and isinstance(b, str):
        return A.PosCmp("<", a, b)
    if isinstance(a, str) or isinstance(b, str):
        raise RewriteError("InternalError", "comparing a plain position with an address")
    out = A.BConst(False)
    prefix = A.BConst(True)
    for (la, bwd, va), (lb, _, vb) in zip(a.coords, b.coords):
        if la != lb:
            break
        step = addr_lt_formula(vb, va) if bwd else addr_lt_formula(va, vb)
        out = b_or(out, b_and(prefix, step))
        prefix = b_and(prefix, addr_eq_formula(va, vb))
    if a.site < b.site:
        out = b_or(out, prefix)
    return out


def lower_poscmp(e: A.PosCmp):
    a, b = e.left, e.right
    if isinstance(a, str) and isinstance(b, str):
        return e
    op = e.op
    if op == "==":
        return addr_eq_formula(a, b)
    if op == "!=":
        return b_not(addr_eq_formula(a, b))
    if op == "<":
        return addr_lt_formula(a, b)
    if op == ">":
        return addr_lt_formula(b, a)
    if op == "<=":
        return b_or(addr_lt_formula(a, b), addr_eq_formula(a, b))
    return b_or(addr_lt_formula(b, a), addr_eq_formula(a, b))


class LowerAddresses(Pass):
    def bexpr(self, e):
        if isinstance(e, A.PosCmp):
            return lower_poscmp(e)
        return super().bexpr(e)


# ---------------------------------------------------------------- pass H


class HoistBooleans(Pass):
    """H: boolean declarations move to the head of the nearest loop body."""

    def hoist(self, s):
        decls: list[str] = []
        body = self._strip(s, decls)
        for d in reversed(decls):
            body = A.LetBool(d, body)
        return body

    def _strip(self, s, decls):
        if isinstance(s, A.LetBool):
            body = s.body
            name = s.name
            if name in decls:
                # sibling scopes reused a name; keep hoisted names distinct
                name = self.fresh(name)
                body = subst(body, {s.name: name})
            decls.append(name)
            return self._strip(body, decls)
        if isinstance(s, A.Seq):
            return A.seq(*(self._strip(x, decls) for x in s.stmts))
        if isinstance(s, A.If):
            return replace(s, then=self._strip(s.then, decls), els=self._strip(s.els, decls))
        if isinstance(s, A.For):
            return replace(s, body=self.hoist(s.body))
        return s

    def function(self, f):
        return replace(f, body=self.hoist(f.body))


# ---------------------------------------------------------------- conversion


def _cond(e, elems: dict[str, str]) -> S.Cond:
    if isinstance(e, A.BConst):
        return S.CConst(e.value)
    if isinstance(e, A.BVar):
        return S.CBool(e.name)
    if isinstance(e, A.BNot):
        return S.c_not(_cond(e.arg, elems))
    if isinstance(e, A.BBin):
        a, b = _cond(e.left, elems), _cond(e.right, elems)
        if e.op == "and":
            return S.CBin("and", a, b)
        if e.op == "or":
            return S.CBin("or", a, b)
        if e.op == "=>":
            return S.CBin("or", S.c_not(a), b)
        return S.CBin("or", S.CBin("and", a, b), S.CBin("and", S.c_not(a), S.c_not(b)))
    if isinstance(e, A.PosCmp):
        return S.CPos(e.op, e.left, e.right)
    if isinstance(e, A.LitEq):
        l, r = e.left, e.right
        if isinstance(l, A.Const) and isinstance(r, A.Const):
            return S.CConst(l.value == r.value)
        if isinstance(l, A.Const):
            l, r = r, l
        if isinstance(l, A.Var) and isinstance(r, A.Const) and isinstance(r.value, A.CChar):
            return S.CLabel(elems[l.name], r.value.char)
    raise RewriteError("InternalError", f"condition not in simple form: {e!r}")


def _leading_bools(s):
    names = []
    while isinstance(s, A.LetBool):
        names.append(s.name)
        s = s.body
    return tuple(names), s


def _convert(s, word: str, elems: dict[str, str]) -> S.SStmt:
    if isinstance(s, A.Seq):
        return S.sseq(*(_convert(x, word, elems) for x in s.stmts))
    if isinstance(s, A.Skip):
        return S.SSkip()
    if isinstance(s, A.SetTrue):
        return S.SSetTrue(s.name)
    if isinstance(s, A.If):
        return S.SIf(_cond(s.cond, elems), _convert(s.then, word, elems), _convert(s.els, word, elems))
    if isinstance(s, A.Yield):
        e = s.expr
        if isinstance(e, A.Var) and e.name in elems:
            return S.SPrintLabel(elems[e.name])
        if isinstance(e, A.Const) and isinstance(e.value, A.CChar):
            return S.SPrintChar(e.value.char)
    if isinstance(s, A.For) and s.iter == A.Var(word):
        bools, body = _leading_bools(s.body)
        e2 = dict(elems)
        e2[s.elem] = s.pos
        return S.SFor(s.pos, s.backward, bools, _convert(body, word, e2))
    raise RewriteError("InternalError", f"statement not in simple form: {type(s).__name__}")


def to_simple(p: A.Program) -> S.SimpleProgram:
    f = p.main_function
    if len(p.functions) != 1 or len(f.params) != 1:
        raise RewriteError("InternalError", "normalized program must have a single one-argument function")
    bools, body = _leading_bools(f.body)
    return S.SimpleProgram(bools, _convert(body, f.params[0].name, {}))


def simple_to_hl(sp: S.SimpleProgram, word: str = "w") -> A.Program:
    """Embed a simple program back into the high-level language."""

    def cond(c):
        if isinstance(c, S.CConst):
            return A.BConst(c.value)
        if isinstance(c, S.CBool):
            return A.BVar(c.name)
        if isinstance(c, S.CNot):
            return A.BNot(cond(c.arg))
        if isinstance(c, S.CBin):
            return A.BBin(c.op, cond(c.left), cond(c.right))
        if isinstance(c, S.CLabel):
            return A.LitEq(A.Var(f"{c.var}_c"), A.Const(A.CChar(c.char)))
        return A.PosCmp(c.op, c.left, c.right)

    def stmt(s):
        if isinstance(s, S.SSeq):
            return A.seq(*(stmt(x) for x in s.stmts))
        if isinstance(s, S.SFor):
            body = stmt(s.body)
            for b in reversed(s.bools):
                body = A.LetBool(b, body)
            return A.For(s.var, f"{s.var}_c", A.Var(word), body, s.backward)
        if isinstance(s, S.SIf):
            return A.If(cond(s.cond), stmt(s.then), stmt(s.els))
        if isinstance(s, S.SSetTrue):
            return A.SetTrue(s.name)
        if isinstance(s, S.SPrintLabel):
            return A.Yield(A.Var(f"{s.var}_c"))
        if isinstance(s, S.SPrintChar):
            return A.Yield(A.Const(A.CChar(s.char)))
        return A.Skip()

    body = stmt(sp.body)
    for b in reversed(sp.bools):
        body = A.LetBool(b, body)
    f = A.Function("main", (A.Param(word, A.TOut(1)),), A.TOut(1), body)
    return A.Program((f,), "main")


# ---------------------------------------------------------------- driver


PASSES = {
    "A": ElimLiteralEqualities,
    "B": ElimLiteralProductions,
    "C": ElimFunctionCalls,
    "D": ElimBooleanGenerators,
    "E": ElimLetOutput,
    "F": ElimReturns,
    "G": ExpandLoops,
    "H": HoistBooleans,
}


@dataclass
class PassReport:
    pass_id: str
    size_in: int
    size_out: int
    fresh_names: list[str] = field(default_factory=list)


@dataclass
class RewriteResult:
    stages: dict[str, A.Program]  # "input", then one entry per pass
    reports: list[PassReport]
    simple: S.SimpleProgram


def run_passes(p, upto: str = "H") -> RewriteResult:
    """Run passes A..`upto`; with upto="H" also convert to a simple program."""
    tp = p if isinstance(p, TypedProgram) else typecheck_program(p)
    check_verifiable(tp)
    prog = tp.program
    fresh = Fresh()
    stages = {"input": prog}
    reports = []
    for pid, cls in PASSES.items():
        before = len(fresh.made)
        out = cls(fresh).program(prog)
        reports.append(PassReport(pid, node_count(prog), node_count(out), fresh.made[before:]))
        stages[pid] = prog = out
        if pid == upto:
            break
    simple = to_simple(prog) if upto == "H" else None
    return RewriteResult(stages, reports, simple)


def rewrite_to_simple(p) -> S.SimpleProgram:
    return run_passes(p).simple


def run_pass(pid: str, p: A.Program, fresh: Fresh | None = None) -> A.Program:
    return PASSES[pid](fresh or Fresh()).program(p)
