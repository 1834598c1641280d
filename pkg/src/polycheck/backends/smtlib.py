"""SMT-LIB v2.6 emission (logic UFDTLIA).

Words are an uninterpreted function ``w : Int -> Letter`` together with a
length ``len``; letters and tags are enumeration datatypes, booleans are
``Bool``.  Sub-formulas shared in the formula DAG become ``define-fun``s.
"""
from __future__ import annotations

import re

from .. import BLANK, fo

_SIMPLE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _letter_names(letters) -> dict[str, str]:
    out = {}
    for k, c in enumerate(sorted(letters)):
        if c == BLANK:
            out[c] = "L_blank"
        elif c.isalnum() and c.isascii():
            out[c] = f"L_{c}"
        else:
            out[c] = f"L_u{ord(c):x}"
    return out


def _sym(name: str) -> str:
    return name if _SIMPLE.match(name) else "|" + name.replace("|", "_").replace("\\", "_") + "|"


class SmtEmitter:
    _SHARE_MIN_SIZE = 8

    def __init__(self, f: fo.Formula):
        if fo.free_vars(f):
            raise ValueError("only closed formulas are emitted")
        self.f = f
        self.letters = _letter_names(fo.letters(f) | {BLANK})
        self.tags = sorted(fo.tags_of(f))
        self.defs: list[str] = []
        self.names: dict[int, str] = {}
        self.counter = 0
        parents: dict[int, int] = {}
        for g in fo._postorder(f):
            for c in g.children():
                parents[id(c)] = parents.get(id(c), 0) + 1
        self.parents = parents

    def tag_sym(self, t: str) -> str:
        return "T_" + re.sub(r"[^A-Za-z0-9_]", "_", t)

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    def emit(self, g: fo.Formula, env: dict[str, str]) -> str:
        t = type(g)
        if t is fo.Const:
            return "true" if g.value else "false"
        if t is fo.PosEq:
            return f"(= {env[g.x]} {env[g.y]})"
        if t is fo.PosLt:
            return f"(< {env[g.x]} {env[g.y]})"
        if t is fo.Letter:
            return f"(= (w {env[g.x]}) {self.letters[g.a]})"
        if t is fo.BoolAtom:
            return env[g.b]
        if t is fo.TagIs:
            return f"(= {env[g.t]} {self.tag_sym(g.tag)})"
        if t is fo.TagEq:
            return f"(= {env[g.t]} {env[g.u]})"
        if self.parents.get(id(g), 0) > 1 and fo.size(g) >= self._SHARE_MIN_SIZE:
            return self.call(g, env)
        return self.compound(g, env)

    def compound(self, g, env) -> str:
        t = type(g)
        if t is fo.Not:
            return f"(not {self.emit(g.arg, env)})"
        if t is fo.And:
            return "(and " + " ".join(self.emit(c, env) for c in g.args) + ")"
        if t is fo.Or:
            return "(or " + " ".join(self.emit(c, env) for c in g.args) + ")"
        if t is fo.Quant:
            v = self.fresh({fo.POS: "x", fo.BOOL: "b", fo.TAG: "t"}[g.sort])
            body = self.emit(g.body, {**env, g.var: v})
            q = "forall" if g.forall else "exists"
            if g.sort == fo.POS:
                guard = f"(<= 0 {v}) (< {v} len)"
                inner = f"(=> (and {guard}) {body})" if g.forall else f"(and {guard} {body})"
                return f"({q} (({v} Int)) {inner})"
            if g.sort == fo.BOOL:
                return f"({q} (({v} Bool)) {body})"
            if set(g.domain) != set(self.tags):
                guard = "(or " + " ".join(f"(= {v} {self.tag_sym(d)})" for d in g.domain) + ")"
                body = f"(=> {guard} {body})" if g.forall else f"(and {guard} {body})"
            return f"({q} (({v} Tag)) {body})"
        raise TypeError(t)

    def call(self, g, env) -> str:
        fv = sorted(fo.free_vars(g))
        name = self.names.get(id(g))
        if name is None:
            sorts = fo.free_sorts(g)
            params = {v: f"a{k}" for k, v in enumerate(fv)}
            body = self.compound(g, params)
            smt_sort = {fo.POS: "Int", fo.BOOL: "Bool", fo.TAG: "Tag"}
            decl = " ".join(f"({params[v]} {smt_sort[sorts[v]]})" for v in fv)
            name = self.names[id(g)] = f"f{len(self.names)}"
            self.defs.append(f"(define-fun {name} ({decl}) Bool {body})")
        if not fv:
            return name
        return f"({name} " + " ".join(env[v] for v in fv) + ")"

    def script(self) -> str:
        body = self.emit(self.f, {})
        lines = [
            "(set-logic UFDTLIA)",
            "(set-option :produce-models true)",
        ]
        rev = {v: k for k, v in self.letters.items()}
        lines.append("; letters: " + " ".join(f"{s}={ord(rev[s]):#x}" for s in sorted(rev)))
        lines.append("(declare-datatypes ((Letter 0)) ((" + " ".join(f"({s})" for s in sorted(rev)) + ")))")
        if self.tags:
            lines.append("(declare-datatypes ((Tag 0)) ((" + " ".join(f"({self.tag_sym(t)})" for t in self.tags) + ")))")
        lines += [
            "(declare-const len Int)",
            "(declare-fun w (Int) Letter)",
            "(assert (>= len 0))",
        ]
        lines += self.defs
        lines.append(f"(assert {body})")
        lines.append("(check-sat)")
        lines.append("(get-model)")
        return "\n".join(lines) + "\n"


def to_smtlib(f: fo.Formula) -> str:
    """SMT-LIB script asserting `f` (satisfiable iff some word satisfies it)."""
    return SmtEmitter(f).script()


def letter_table(f: fo.Formula) -> dict[str, str]:
    """Constructor name -> letter, for decoding models."""
    return {v: k for k, v in _letter_names(fo.letters(f) | {BLANK}).items()}


def decode_word(length: int, values: dict[int, str], table: dict[str, str]) -> str:
    return "".join(table.get(values.get(i, "L_blank"), BLANK) for i in range(length))


# ------------------------------------------------------------ model decoding


def parse_sexprs(text: str) -> list:
    """S-expressions as nested lists of atom strings (|quoted| symbols unquoted)."""
    toks = re.findall(r'\(|\)|\|[^|]*\||"(?:[^"]|"")*"|;[^\n]*|[^\s()]+', text)
    stack: list[list] = [[]]
    for t in toks:
        if t.startswith(";"):
            continue
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced parenthesis in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t[1:-1] if t.startswith("|") else t)
    if len(stack) != 1:
        raise ValueError("unbalanced parenthesis in solver output")
    return stack[0]


def _eval_term(t, env: dict):
    if isinstance(t, str):
        if t in env:
            return env[t]
        if t in ("true", "false"):
            return t == "true"
        if re.fullmatch(r"\d+", t):
            return int(t)
        return t  # a datatype constructor
    head, *args = t
    if head == "let":
        inner = dict(env)
        for name, val in args[0]:
            inner[name] = _eval_term(val, env)
        return _eval_term(args[1], inner)
    if head == "ite":
        return _eval_term(args[1] if _eval_term(args[0], env) else args[2], env)
    if head == "as":
        return _eval_term(args[0], env)
    vals = [_eval_term(a, env) for a in args]
    if head == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - sum(vals[1:])
    if head == "+":
        return sum(vals)
    if head == "=":
        return all(v == vals[0] for v in vals[1:])
    if head == "distinct":
        return len(set(vals)) == len(vals)
    if head == "not":
        return not vals[0]
    if head == "and":
        return all(vals)
    if head == "or":
        return any(vals)
    if head == "=>":
        return (not vals[0]) or vals[1]
    ops = {"<": int.__lt__, "<=": int.__le__, ">": int.__gt__, ">=": int.__ge__}
    if head in ops:
        return all(ops[head](a, b) for a, b in zip(vals, vals[1:]))
    raise ValueError(f"unsupported model term {head!r}")


def decode_model(text: str, f: fo.Formula) -> str | None:
    """The input word described by a `(get-model)` answer, or None."""
    try:
        defs = {}
        for item in parse_sexprs(text):
            if not isinstance(item, list):
                continue
            # z3 and cvc5 wrap the definitions in one list; older z3 prefixes `model`
            for d in item:
                if isinstance(d, list) and d and d[0] == "define-fun":
                    defs[d[1]] = d
        length = _eval_term(defs["len"][4], {})
        table = letter_table(f)
        if "w" not in defs:
            return BLANK * length
        _, _, params, _, body = defs["w"]
        (param, _sort), = params
        aux = {name: d for name, d in defs.items() if not d[2]}
        env = {name: _eval_term(d[4], {}) for name, d in aux.items() if name not in ("len",)}
        letters = [_eval_term(body, {**env, param: i}) for i in range(length)]
        return "".join(table.get(c, BLANK) for c in letters)
    except (KeyError, ValueError, TypeError, IndexError):
        return None
