"""Reference semantics of high-level for-programs.

Values: a character is a one-letter ``str``; a list is a ``tuple`` of
values.  Positions are 0-based ``int`` indices; after loop expansion they
may also be symbolic addresses (see `addr_before`).
"""
from __future__ import annotations

import json

from . import hl_ast as A
from .errors import PolycheckError
from .typecheck import TypedProgram


class InterpreterBug(PolycheckError):
    stage = "eval"

    def __init__(self, message: str):
        super().__init__("InternalError", message)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def const_value(c: A.CExpr):
    if isinstance(c, A.CChar):
        return c.char
    return tuple(const_value(x) for x in c.items)


def to_value(x, depth: int = 1):
    """Coerce Python strings / nested lists into interpreter values."""
    if depth == 0:
        if not (isinstance(x, str) and len(x) == 1):
            raise ValueError(f"expected a character, got {x!r}")
        return x
    if isinstance(x, str) and depth == 1:
        return tuple(x)
    return tuple(to_value(y, depth - 1) for y in x)


def value_depth(v) -> int:
    if isinstance(v, str):
        return 0
    return 1 + (value_depth(v[0]) if v else 0)


def as_word(v) -> str:
    return "".join(v)


def format_value(v) -> str:
    """Flatten a nested word: words joined by '#', deeper levels by '##', ..."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if all(isinstance(x, str) for x in v):
        return "".join(v)
    d = value_depth(v)
    return ("#" * (d - 1)).join(format_value(x) for x in v)


def format_nested(v) -> str:
    """Bracketed rendering: words as JSON strings, deeper levels as lists."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str) or all(isinstance(x, str) for x in v):
        return json.dumps("".join(v), ensure_ascii=False)
    return "[" + ", ".join(format_nested(x) for x in v) + "]"


# ---------------------------------------------------------------- addresses


class AddrValue(tuple):
    """Runtime value of an `Addr`: (site, ((loop id, backward, value), ...))."""


def addr_eq(a, b) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if a[0] != b[0] or len(a[1]) != len(b[1]):
        return False
    return all(addr_eq(x[2], y[2]) for x, y in zip(a[1], b[1]))


def addr_before(a, b) -> bool:
    """Strict precedence of two outputs of the same generator."""
    if isinstance(a, int) and isinstance(b, int):
        return a < b
    for (la, bwd, va), (lb, _, vb) in zip(a[1], b[1]):
        if la != lb:
            break
        if not addr_eq(va, vb):
            return addr_before(vb, va) if bwd else addr_before(va, vb)
    return a[0] < b[0]


def compare_positions(op: str, a, b) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return {
            "==": a == b, "!=": a != b, "<": a < b,
            "<=": a <= b, ">": a > b, ">=": a >= b,
        }[op]
    if op == "==":
        return addr_eq(a, b)
    if op == "!=":
        return not addr_eq(a, b)
    if op == "<":
        return addr_before(a, b)
    if op == ">":
        return addr_before(b, a)
    if op == "<=":
        return addr_before(a, b) or addr_eq(a, b)
    return addr_before(b, a) or addr_eq(a, b)


# ---------------------------------------------------------------- evaluator


class Evaluator:
    def __init__(self, program: A.Program):
        self.program = program
        self.funs = {f.name: f for f in program.functions}

    def call(self, fname: str, args: tuple, env: dict):
        f = self.funs[fname]
        frame: dict = {}
        for prm, arg in zip(f.params, args):
            frame[prm.name] = self.oexpr(arg.expr, env, {})
            for name, pos in zip(prm.positions, arg.positions):
                frame[name] = env[pos]
        return self.run_body(f.body, frame, f.ret)

    def run_body(self, body, env: dict, ret):
        out: list = []
        try:
            self.stmt(body, env, {}, out)
        except _Return as r:
            # a list-valued return appends to what was already yielded, then stops
            if isinstance(ret, A.TOut) and ret.depth >= 1:
                return tuple(out) + tuple(r.value)
            return r.value
        if isinstance(ret, A.TBool):
            return False
        if ret.depth == 0:
            raise InterpreterBug("character-valued body finished without return")
        return tuple(out)

    # statements -------------------------------------------------------
    def stmt(self, s, env: dict, bools: dict, out: list):
        t = type(s)
        if t is A.Seq:
            for x in s.stmts:
                self.stmt(x, env, bools, out)
        elif t is A.For:
            seq = self.oexpr(s.iter, env, bools)
            items = enumerate(seq)
            if s.backward:
                items = reversed(list(items))
            for k, x in items:
                env[s.pos] = k
                env[s.elem] = x
                self.stmt(s.body, env, bools, out)
        elif t is A.If:
            branch = s.then if self.bexpr(s.cond, env, bools) else s.els
            self.stmt(branch, env, bools, out)
        elif t is A.Yield:
            out.append(self.oexpr(s.expr, env, bools))
        elif t is A.SetTrue:
            if s.name not in bools:
                raise InterpreterBug(f"boolean {s.name!r} set outside its scope")
            bools[s.name] = True
        elif t is A.LetBool:
            if s.name in bools:
                raise InterpreterBug(f"boolean {s.name!r} re-initialised while live")
            bools[s.name] = False
            try:
                self.stmt(s.body, env, bools, out)
            finally:
                del bools[s.name]
        elif t is A.LetOut:
            env[s.name] = self.oexpr(s.expr, env, bools)
            self.stmt(s.body, env, bools, out)
        elif t is A.Return:
            e = s.expr
            if isinstance(e, (A.BConst, A.BVar, A.BNot, A.BBin, A.PosCmp, A.BCall, A.LitEq, A.BoolGen)):
                raise _Return(self.bexpr(e, env, bools))
            raise _Return(self.oexpr(e, env, bools))
        elif t is A.Skip:
            pass
        else:
            raise InterpreterBug(f"cannot execute {t.__name__}")

    # expressions ------------------------------------------------------
    def oexpr(self, e, env: dict, bools: dict):
        t = type(e)
        if t is A.Var:
            return env[e.name]
        if t is A.Const:
            return const_value(e.value)
        if t is A.OList:
            return tuple(self.oexpr(x, env, bools) for x in e.items)
        if t is A.Call:
            return self.call(e.fname, e.args, env)
        if t is A.ListGen:
            return self.run_body(e.body, dict(env), A.TOut(e.depth))
        raise InterpreterBug(f"cannot evaluate {t.__name__}")

    def pos(self, term, env):
        if isinstance(term, A.Addr):
            return AddrValue((term.site, tuple((l, b, self.pos(v, env)) for l, b, v in term.coords)))
        return env[term]

    def bexpr(self, e, env: dict, bools: dict) -> bool:
        t = type(e)
        if t is A.BVar:
            return bools[e.name]
        if t is A.BConst:
            return e.value
        if t is A.BNot:
            return not self.bexpr(e.arg, env, bools)
        if t is A.BBin:
            if e.op == "and":
                return self.bexpr(e.left, env, bools) and self.bexpr(e.right, env, bools)
            if e.op == "or":
                return self.bexpr(e.left, env, bools) or self.bexpr(e.right, env, bools)
            left = self.bexpr(e.left, env, bools)
            right = self.bexpr(e.right, env, bools)
            return (not left or right) if e.op == "=>" else left == right
        if t is A.PosCmp:
            return compare_positions(e.op, self.pos(e.left, env), self.pos(e.right, env))
        if t is A.LitEq:
            return self.oexpr(e.left, env, bools) == self.oexpr(e.right, env, bools)
        if t is A.BCall:
            return self.call(e.fname, e.args, env)
        if t is A.BoolGen:
            return self.run_body(e.body, dict(env), A.TBool())
        raise InterpreterBug(f"cannot evaluate {t.__name__}")


def eval_program(p, value, fname: str | None = None):
    """Run `fname` (default: main) of `p` on the single argument `value`.

    Strings are accepted for words (depth-1 arguments).
    """
    if isinstance(p, TypedProgram):
        p = p.program
    f = p.function(fname or p.main)
    if len(f.params) != 1:
        raise ValueError(f"{f.name} takes {len(f.params)} arguments")
    prm = f.params[0]
    if prm.positions:
        raise ValueError(f"{f.name} takes positions")
    ev = Evaluator(p)
    v = to_value(value, prm.type.depth)
    return ev.run_body(f.body, {prm.name: v}, f.ret)


def run_word(p, word: str) -> str:
    """Convenience wrapper for Out[1] -> Out[1] programs."""
    return as_word(eval_program(p, word))


def support_constants(p) -> set[str]:
    """The letters occurring as constants anywhere in the program."""
    if isinstance(p, TypedProgram):
        p = p.program
    return A.letters_of(p)
