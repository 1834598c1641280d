"""Type checker enforcing restrictions R.I to R.VII.

Position types carry an *origin*: the binding site of the list they index.
Two loops over the same list variable share its origin; loops over any
other expression get a fresh origin in surface programs.  In *relaxed*
mode (used for intermediate programs produced by the rewriter) generator
origins are keyed by their alpha-normalized structure, reserved names are
allowed and address terms are accepted in comparisons.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import hl_ast as A
from .errors import TypeCheckError


@dataclass(frozen=True)
class Signature:
    """`(Out[n], l)` groups per parameter, and the result type."""

    params: tuple[tuple[A.TOut, int], ...]
    ret: A.TBool | A.TOut

    def __str__(self) -> str:
        groups = ", ".join(f"({p}, {n})" for p, n in self.params)
        return f"{groups} -> {self.ret}"


@dataclass
class TypedProgram:
    program: A.Program
    signatures: dict[str, Signature]
    types: dict[int, object] = field(repr=False)

    def type_of(self, node) -> object:
        return self.types[id(node)]

    def __eq__(self, other):
        return (
            isinstance(other, TypedProgram)
            and self.program == other.program
            and self.signatures == other.signatures
            and {k: str(v) for k, v in self.types.items()} == {k: str(v) for k, v in other.types.items()}
        )


@dataclass(frozen=True)
class _Binding:
    kind: str  # "out", "pos", "bool"
    type: object
    key: object  # unique binding identity


def alpha_key(node) -> object:
    """Structure of `node` with all binders renamed canonically."""
    counter = itertools.count()
    return _alpha(node, {}, counter)


def _alpha(n, env, counter):
    if isinstance(n, str):
        return env.get(n, n)
    if isinstance(n, (bool, int)) or n is None:
        return n
    if isinstance(n, tuple):
        return tuple(_alpha(x, env, counter) for x in n)
    if isinstance(n, A.For):
        it = _alpha(n.iter, env, counter)
        e2 = dict(env)
        e2[n.pos] = f"_{next(counter)}"
        e2[n.elem] = f"_{next(counter)}"
        return ("for", n.backward, it, _alpha(n.body, e2, counter))
    if isinstance(n, A.LetBool):
        e2 = dict(env)
        e2[n.name] = f"_{next(counter)}"
        return ("letb", _alpha(n.body, e2, counter))
    if isinstance(n, A.LetOut):
        ex = _alpha(n.expr, env, counter)
        e2 = dict(env)
        e2[n.name] = f"_{next(counter)}"
        return ("leto", ex, _alpha(n.body, e2, counter))
    if isinstance(n, A.Addr):
        return ("addr", n.site, tuple((l, b, _alpha(t, env, counter)) for l, b, t in n.coords))
    fields = [f for f in getattr(n, "__dataclass_fields__", {}) if f != "span"]
    return (type(n).__name__,) + tuple(
        _alpha(getattr(n, f), env, counter) if f not in ("fname", "op") else getattr(n, f)
        for f in fields
    )


class Checker:
    def __init__(self, relaxed: bool = False):
        self.relaxed = relaxed
        self.types: dict[int, object] = {}
        self.sigs: dict[str, Signature] = {}
        self.ids = itertools.count()

    def err(self, cat: str, msg: str, node=None):
        raise TypeCheckError(cat, msg, getattr(node, "span", None))

    def fresh_key(self, name: str):
        return (name, next(self.ids))

    def note(self, node, ty):
        self.types[id(node)] = ty
        return ty

    # ------------------------------------------------------------ program
    def program(self, p: A.Program) -> TypedProgram:
        names = set()
        for f in p.functions:
            if f.name in names:
                self.err("Shadowing", f"function {f.name!r} defined twice", f)
            self.function(f)
            names.add(f.name)
        if p.main not in self.sigs:
            self.err("UnknownVariable", f"no function named {p.main!r}", p)
        return TypedProgram(p, dict(self.sigs), self.types)

    def function(self, f: A.Function):
        env: dict[str, _Binding] = {}
        groups = []
        for prm in f.params:
            if isinstance(prm.type, A.TBool):
                self.err("BooleanArgument", f"parameter {prm.name!r} of {f.name!r} is a boolean", prm)
            self.bind(env, prm.name, _Binding("out", prm.type, self.fresh_key(prm.name)), prm)
            origin = env[prm.name].key
            for pos in prm.positions:
                self.bind(env, pos, _Binding("pos", A.TPos(origin), self.fresh_key(pos)), prm)
            groups.append((prm.type, len(prm.positions)))
        self.stmt(f.body, env, f.ret)
        self.sigs[f.name] = Signature(tuple(groups), f.ret)

    def bind(self, env, name: str, b: _Binding, node):
        if name.startswith("__") and not self.relaxed:
            self.err("SyntaxError", f"reserved identifier {name!r}", node)
        if name in env:
            if env[name].kind == "bool":
                self.err("BooleanReset", f"boolean {name!r} is declared again", node)
            self.err("Shadowing", f"variable {name!r} shadows an earlier binding", node)
        env[name] = b

    # ------------------------------------------------------------ statements
    def stmt(self, s, env, ret):
        if isinstance(s, A.Seq):
            for x in s.stmts:
                self.stmt(x, env, ret)
        elif isinstance(s, A.Skip):
            pass
        elif isinstance(s, A.If):
            self.bool_expr(s.cond, env)
            self.stmt(s.then, env, ret)
            self.stmt(s.els, env, ret)
        elif isinstance(s, A.Yield):
            if not isinstance(ret, A.TOut) or ret.depth == 0:
                self.err("TypeMismatch", "yield outside a list-producing function", s)
            t = self.out_expr(s.expr, env)
            if t.depth != ret.depth - 1:
                self.err("TypeMismatch", f"yield of {t} in a function returning {ret}", s)
        elif isinstance(s, A.Return):
            if isinstance(ret, A.TBool):
                self.bool_expr(s.expr, env)
            else:
                t = self.out_expr(s.expr, env)
                if t != ret:
                    self.err("TypeMismatch", f"return of {t} in a function returning {ret}", s)
        elif isinstance(s, A.LetOut):
            t = self.out_expr(s.expr, env)
            e2 = dict(env)
            key = self.origin_of(s.expr, env)
            self.bind(e2, s.name, _Binding("out", t, key), s)
            self.stmt(s.body, e2, ret)
        elif isinstance(s, A.LetBool):
            e2 = dict(env)
            self.bind(e2, s.name, _Binding("bool", A.TBool(), self.fresh_key(s.name)), s)
            self.stmt(s.body, e2, ret)
        elif isinstance(s, A.SetTrue):
            b = env.get(s.name)
            if b is None:
                self.err("UnknownVariable", f"unknown variable {s.name!r}", s)
            if b.kind != "bool":
                self.err("MutationViolation", f"{s.name!r} is immutable", s)
        elif isinstance(s, A.Assign):
            b = env.get(s.name)
            if b is not None and b.kind == "bool":
                self.err("BooleanReset", f"boolean {s.name!r} may only be set to True", s)
            self.err("MutationViolation", f"{s.name!r} cannot be reassigned", s)
        elif isinstance(s, A.For):
            t = self.out_expr(s.iter, env)
            if t.depth == 0:
                self.err("TypeMismatch", "cannot iterate over a character", s)
            origin = self.origin_of(s.iter, env)
            e2 = dict(env)
            if s.pos == s.elem:
                self.err("Shadowing", f"loop binds {s.pos!r} twice", s)
            self.bind(e2, s.pos, _Binding("pos", A.TPos(origin), self.fresh_key(s.pos)), s)
            self.bind(e2, s.elem, _Binding("out", A.TOut(t.depth - 1), self.fresh_key(s.elem)), s)
            self.stmt(s.body, e2, ret)
        else:
            self.err("TypeMismatch", f"unexpected statement {type(s).__name__}", s)
        self.note(s, None)

    def origin_of(self, e, env):
        if isinstance(e, A.Var) and e.name in env:
            return env[e.name].key
        if self.relaxed and isinstance(e, A.ListGen):
            return ("gen", alpha_key(e))
        return self.fresh_key("<expr>")

    # ------------------------------------------------------------ expressions
    def out_expr(self, e, env) -> A.TOut:
        if isinstance(e, A.Var):
            b = env.get(e.name)
            if b is None:
                self.err("UnknownVariable", f"unknown variable {e.name!r}", e)
            if b.kind != "out":
                self.err("TypeMismatch", f"{e.name!r} is not a list or character", e)
            return self.note(e, b.type)
        if isinstance(e, A.Const):
            return self.note(e, A.TOut(self.const_depth(e.value, e)))
        if isinstance(e, A.OList):
            ts = [self.out_expr(x, env) for x in e.items]
            if not ts:
                return self.note(e, A.TOut(1))
            if any(t != ts[0] for t in ts):
                self.err("TypeMismatch", "list elements of different depths", e)
            return self.note(e, A.TOut(ts[0].depth + 1))
        if isinstance(e, A.Call):
            sig = self.call(e, env)
            if not isinstance(sig.ret, A.TOut):
                self.err("TypeMismatch", f"{e.fname!r} returns a boolean", e)
            return self.note(e, sig.ret)
        if isinstance(e, A.ListGen):
            if not self.relaxed:
                self.err("SyntaxError", "generator in surface program", e)
            inner = {k: v for k, v in env.items() if v.kind != "bool"}
            self.stmt(e.body, inner, A.TOut(e.depth))
            return self.note(e, A.TOut(e.depth))
        self.err("TypeMismatch", f"expected a list expression, got {type(e).__name__}", e)

    def const_depth(self, c, node) -> int:
        if isinstance(c, A.CChar):
            return 0
        ds = {self.const_depth(x, node) for x in c.items}
        if len(ds) > 1:
            self.err("TypeMismatch", "constant list of mixed depths", node)
        return (ds.pop() if ds else 0) + 1

    def call(self, e, env) -> Signature:
        sig = self.sigs.get(e.fname)
        if sig is None:
            self.err("WhileOrRecursion", f"call to {e.fname!r} which is not defined before this point", e)
        if len(sig.params) != len(e.args):
            self.err("TypeMismatch", f"{e.fname!r} expects {len(sig.params)} arguments", e)
        for arg, (pty, npos) in zip(e.args, sig.params):
            if isinstance(arg.expr, A.Var) and env.get(arg.expr.name, _Binding("", None, None)).kind == "bool":
                self.err("BooleanArgument", f"boolean {arg.expr.name!r} passed to {e.fname!r}", arg)
            t = self.out_expr(arg.expr, env)
            if t != pty:
                self.err("TypeMismatch", f"argument of type {t} where {pty} expected", arg)
            if len(arg.positions) != npos:
                self.err("TypeMismatch", f"{e.fname!r} expects {npos} positions with this argument", arg)
            origin = self.origin_of(arg.expr, env)
            for p in arg.positions:
                b = env.get(p)
                if b is None:
                    self.err("UnknownVariable", f"unknown variable {p!r}", arg)
                if b.kind != "pos":
                    self.err("TypeMismatch", f"{p!r} is not a position", arg)
                if b.type.origin != origin:
                    self.err("CrossListComparison", f"position {p!r} does not index this argument", arg)
            self.note(arg, t)
        return sig

    def pos_term(self, t, env, node):
        if isinstance(t, A.Addr):
            if not self.relaxed:
                self.err("SyntaxError", "address term in surface program", node)
            for _, _, sub in t.coords:
                self.pos_term(sub, env, node)
            return ("addr", t.site, tuple(c[0] for c in t.coords))
        b = env.get(t)
        if b is None:
            self.err("UnknownVariable", f"unknown variable {t!r}", node)
        if b.kind == "out":
            return b
        if b.kind != "pos":
            self.err("TypeMismatch", f"{t!r} is not a position", node)
        return b.type.origin

    def bool_expr(self, e, env):
        if isinstance(e, A.BConst):
            pass
        elif isinstance(e, A.BVar):
            b = env.get(e.name)
            if b is None:
                self.err("UnknownVariable", f"unknown variable {e.name!r}", e)
            if b.kind != "bool":
                self.err("TypeMismatch", f"{e.name!r} is not a boolean", e)
        elif isinstance(e, A.BNot):
            self.bool_expr(e.arg, env)
        elif isinstance(e, A.BBin):
            self.bool_expr(e.left, env)
            self.bool_expr(e.right, env)
        elif isinstance(e, A.PosCmp):
            lo = self.pos_term(e.left, env, e)
            ro = self.pos_term(e.right, env, e)
            lout, rout = isinstance(lo, _Binding), isinstance(ro, _Binding)
            if lout and rout and e.op in ("==", "!="):
                self.err("NestedWordEquality", "equality between two non-constant values", e)
            if lout or rout:
                self.err("TypeMismatch", "position comparison on non-positions", e)
            if isinstance(lo, tuple) and lo[:1] == ("addr",) or isinstance(ro, tuple) and ro[:1] == ("addr",):
                pass  # address terms are ordered by the before relation
            elif lo != ro:
                self.err("CrossListComparison", f"{e.left!r} and {e.right!r} index different lists", e)
        elif isinstance(e, A.BCall):
            sig = self.call(e, env)
            if not isinstance(sig.ret, A.TBool):
                self.err("TypeMismatch", f"{e.fname!r} does not return a boolean", e)
        elif isinstance(e, A.LitEq):
            if not isinstance(e.left, A.Const) and not isinstance(e.right, A.Const):
                self.err("NestedWordEquality", "equality between two non-constant values", e)
            lt = self.out_expr(e.left, env)
            rt = self.out_expr(e.right, env)
            if lt != rt:
                self.err("TypeMismatch", f"comparison of {lt} with {rt}", e)
        elif isinstance(e, A.BoolGen):
            if not self.relaxed:
                self.err("SyntaxError", "generator in surface program", e)
            inner = {k: v for k, v in env.items() if v.kind != "bool"}
            self.stmt(e.body, inner, A.TBool())
        else:
            self.err("TypeMismatch", f"expected a boolean expression, got {type(e).__name__}", e)
        self.note(e, A.TBool())


def typecheck_program(p, relaxed: bool = False) -> TypedProgram:
    """Typecheck a program (or re-check a `TypedProgram`)."""
    if isinstance(p, TypedProgram):
        p = p.program
    return Checker(relaxed).program(p)


def check_verifiable(tp: TypedProgram) -> None:
    """Require main : Out[1] -> Out[1] (one word in, one word out)."""
    sig = tp.signatures[tp.program.main]
    if sig.ret != A.TOut(1) or sig.params != ((A.TOut(1), 0),):
        raise TypeCheckError(
            "TypeMismatch",
            f"main must have type (Out[1], 0) -> Out[1], found {sig}",
            tp.program.main_function.span,
        )
