"""Pretty printer for high-level programs; inverse of the parser."""
from __future__ import annotations

from . import hl_ast as A

IND = "    "

_ESC = {"\\": "\\\\", "\n": "\\n", "\t": "\\t", "'": "\\'", '"': '\\"'}


def _esc(ch: str) -> str:
    if ch in _ESC:
        return _ESC[ch]
    if not ch.isprintable() or ch.isspace() and ch != " ":
        return f"\\u{{{ord(ch):x}}}"
    return ch


def show_const(c: A.CExpr) -> str:
    if isinstance(c, A.CChar):
        return "'" + _esc(c.char) + "'"
    if all(isinstance(x, A.CChar) for x in c.items):
        return '"' + "".join(_esc(x.char) for x in c.items) + '"'
    return "[" + ", ".join(show_const(x) for x in c.items) + "]"


def show_type(t) -> str:
    return str(t)


def show_pos(t) -> str:
    if isinstance(t, A.Addr):
        inner = ", ".join(f"{lid}{'<' if b else '>'}{show_pos(v)}" for lid, b, v in t.coords)
        return f"@{t.site}({inner})"
    return t


def show_oexpr(e, level: int = 0) -> str:
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Const):
        return show_const(e.value)
    if isinstance(e, A.OList):
        return "[" + ", ".join(show_oexpr(x, level) for x in e.items) + "]"
    if isinstance(e, A.Call):
        return f"{e.fname}({', '.join(show_arg(a, level) for a in e.args)})"
    if isinstance(e, A.ListGen):
        return f"gen[{e.depth}]{{\n{show_stmt(e.body, level + 1)}\n{IND * level}}}"
    raise TypeError(f"not a list expression: {e!r}")


def show_arg(a: A.Arg, level: int = 0) -> str:
    s = show_oexpr(a.expr, level)
    if a.positions:
        s += f" with ({', '.join(a.positions)})"
    return s


def show_bexpr(e, level: int = 0) -> str:
    if isinstance(e, A.BConst):
        return "True" if e.value else "False"
    if isinstance(e, A.BVar):
        return e.name
    if isinstance(e, A.BNot):
        return f"not {_batom(e.arg, level)}"
    if isinstance(e, A.BBin):
        return f"{_batom(e.left, level)} {e.op} {_batom(e.right, level)}"
    if isinstance(e, A.PosCmp):
        return f"{show_pos(e.left)} {e.op} {show_pos(e.right)}"
    if isinstance(e, A.BCall):
        return f"{e.fname}({', '.join(show_arg(a, level) for a in e.args)})"
    if isinstance(e, A.LitEq):
        return f"{show_oexpr(e.left, level)} === {show_oexpr(e.right, level)}"
    if isinstance(e, A.BoolGen):
        return f"bgen{{\n{show_stmt(e.body, level + 1)}\n{IND * level}}}"
    raise TypeError(f"not a boolean expression: {e!r}")


def _batom(e, level: int) -> str:
    s = show_bexpr(e, level)
    return f"({s})" if isinstance(e, (A.BBin, A.LitEq, A.PosCmp)) else s


def _is_bexpr(e) -> bool:
    return isinstance(e, (A.BConst, A.BVar, A.BNot, A.BBin, A.PosCmp, A.BCall, A.LitEq, A.BoolGen))


def show_stmt(s, level: int = 1) -> str:
    pad = IND * level
    if isinstance(s, A.Seq):
        lines = []
        for k, x in enumerate(s.stmts):
            text = show_stmt(x, level)
            if isinstance(x, (A.LetOut, A.LetBool)) and k < len(s.stmts) - 1:
                text = f"{pad}begin\n{show_stmt(x, level + 1)}\n{pad}end"
            lines.append(text)
        return "\n".join(lines)
    if isinstance(s, A.Skip):
        return f"{pad}skip"
    if isinstance(s, A.If):
        out = [f"{pad}if {show_bexpr(s.cond, level)} then", show_stmt(s.then, level + 1)]
        if not isinstance(s.els, A.Skip):
            out += [f"{pad}else", show_stmt(s.els, level + 1)]
        out.append(f"{pad}endif")
        return "\n".join(out)
    if isinstance(s, A.Yield):
        return f"{pad}yield {show_oexpr(s.expr, level)}"
    if isinstance(s, A.Return):
        e = s.expr
        return f"{pad}return {show_bexpr(e, level) if _is_bexpr(e) else show_oexpr(e, level)}"
    if isinstance(s, A.LetOut):
        return f"{pad}let {s.name} := {show_oexpr(s.expr, level)} in\n{show_stmt(s.body, level)}"
    if isinstance(s, A.LetBool):
        return f"{pad}let mut {s.name} := False in\n{show_stmt(s.body, level)}"
    if isinstance(s, A.SetTrue):
        return f"{pad}{s.name} := True"
    if isinstance(s, A.Assign):
        v = "False" if s.value is False else show_oexpr(s.value, level)
        return f"{pad}{s.name} := {v}"
    if isinstance(s, A.For):
        it = f"enumerate({show_oexpr(s.iter, level)})"
        if s.backward:
            it = f"reversed({it})"
        return f"{pad}for ({s.pos}, {s.elem}) in {it} do\n{show_stmt(s.body, level + 1)}\n{pad}done"
    raise TypeError(f"not a statement: {s!r}")


def show_function(f: A.Function) -> str:
    params = []
    for p in f.params:
        t = f"{p.name} : {show_type(p.type)}"
        if p.positions:
            t += f" with ({', '.join(p.positions)})"
        params.append(t)
    return f"def {f.name}({', '.join(params)}) : {show_type(f.ret)} :=\n{show_stmt(f.body, 1)}\n"


def show_program(p: A.Program) -> str:
    return "\n".join(show_function(f) for f in p.functions)
