"""WS1S emission for MONA.

Positions are natural numbers.  A prefix of ``R`` reserved positions holds
the tag values (one position per tag) followed by two positions standing for
the booleans false and true; the input word occupies ``R <= p < n`` where
``n`` is a free first-order variable.  Each letter of the alphabet is a free
second-order variable, and the word positions are partitioned among them.
Sub-formulas shared in the formula DAG become ``pred`` declarations.
"""
from __future__ import annotations

import re

from .. import BLANK, fo

_LETTER_RE = re.compile(r"^[A-Za-z0-9]$")


def letter_names(letters) -> dict[str, str]:
    out = {}
    for c in sorted(letters):
        if c == BLANK:
            out[c] = "L_blank"
        elif _LETTER_RE.match(c):
            out[c] = f"L_{c}"
        else:
            out[c] = f"L_u{ord(c):x}"
    return out


class MonaEmitter:
    _SHARE_MIN_SIZE = 8

    def __init__(self, f: fo.Formula):
        if fo.free_vars(f):
            raise ValueError("only closed formulas are emitted")
        self.f = f
        self.letters = letter_names(fo.letters(f) | {BLANK})
        self.letter_vars = sorted(self.letters.values())
        self.tags = sorted(fo.tags_of(f))
        self.tag_pos = {t: k for k, t in enumerate(self.tags)}
        self.uses_bool = any(isinstance(g, (fo.BoolAtom,)) or (isinstance(g, fo.Quant) and g.sort == fo.BOOL)
                             for g in fo._postorder(f))
        self.false_pos = len(self.tags)
        self.true_pos = len(self.tags) + 1
        self.reserved = len(self.tags) + (2 if self.uses_bool else 0)
        self.defs: list[str] = []
        self.names: dict[int, str] = {}
        self.counter = 0
        parents: dict[int, int] = {}
        for g in fo._postorder(f):
            for c in g.children():
                parents[id(c)] = parents.get(id(c), 0) + 1
        self.parents = parents

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    def in_word(self, v: str) -> str:
        return f"{self.reserved} <= {v} & {v} < n"

    def emit(self, g: fo.Formula, env: dict[str, str]) -> str:
        t = type(g)
        if t is fo.Const:
            return "true" if g.value else "false"
        if t is fo.PosEq:
            return f"{env[g.x]} = {env[g.y]}"
        if t is fo.PosLt:
            return f"{env[g.x]} < {env[g.y]}"
        if t is fo.Letter:
            return f"{env[g.x]} in {self.letters[g.a]}"
        if t is fo.BoolAtom:
            return f"{env[g.b]} = {self.true_pos}"
        if t is fo.TagIs:
            return f"{env[g.t]} = {self.tag_pos[g.tag]}"
        if t is fo.TagEq:
            return f"{env[g.t]} = {env[g.u]}"
        if self.parents.get(id(g), 0) > 1 and fo.size(g) >= self._SHARE_MIN_SIZE:
            return self.call(g, env)
        return self.compound(g, env)

    def compound(self, g, env) -> str:
        t = type(g)
        if t is fo.Not:
            return f"~({self.emit(g.arg, env)})"
        if t is fo.And:
            return "(" + " & ".join(f"({self.emit(c, env)})" for c in g.args) + ")"
        if t is fo.Or:
            return "(" + " | ".join(f"({self.emit(c, env)})" for c in g.args) + ")"
        if t is fo.Quant:
            v = self.fresh({fo.POS: "x", fo.BOOL: "b", fo.TAG: "t"}[g.sort])
            body = self.emit(g.body, {**env, g.var: v})
            if g.sort == fo.POS:
                guard = self.in_word(v)
            elif g.sort == fo.BOOL:
                guard = f"{v} = {self.false_pos} | {v} = {self.true_pos}"
            else:
                guard = " | ".join(f"{v} = {self.tag_pos[d]}" for d in g.domain) or "false"
            if g.forall:
                return f"(all1 {v}: ({guard}) => ({body}))"
            return f"(ex1 {v}: ({guard}) & ({body}))"
        raise TypeError(t)

    def call(self, g, env) -> str:
        fv = sorted(fo.free_vars(g))
        name = self.names.get(id(g))
        if name is None:
            params = {v: f"p{k}" for k, v in enumerate(fv)}
            body = self.compound(g, params)
            name = self.names[id(g)] = f"f{len(self.names)}"
            # n and the letter sets are passed explicitly
            decl = ", ".join([f"var1 {params[v]}" for v in fv] + ["var1 n"] + [f"var2 {s}" for s in self.letter_vars])
            self.defs.append(f"pred {name}({decl}) = {body};")
        return f"{name}(" + ", ".join([env[v] for v in fv] + ["n"] + self.letter_vars) + ")"

    def script(self) -> str:
        body = self.emit(self.f, {})
        at_empty = fo.eval_formula(self.f, "")
        lines = ["ws1s;"]
        rev = {v: k for k, v in self.letters.items()}
        lines.append("# letters: " + " ".join(f"{s}={ord(rev[s]):#x}" for s in sorted(rev)))
        if self.tags:
            lines.append("# tags: " + " ".join(f"{t}={k}" for t, k in self.tag_pos.items()))
        if self.uses_bool:
            lines.append(f"# booleans: false={self.false_pos} true={self.true_pos}")
        lines.append(f"# word positions: {self.reserved} <= p < n")
        names = sorted(rev)
        lines.append("var1 n;")
        lines.append("var2 " + ", ".join(names) + ";")
        lines.append(f"assert n >= {self.reserved};")
        # every word position carries exactly one letter
        one = " | ".join(f"p in {s}" for s in names)
        lines.append(f"assert all1 p: ({self.in_word('p')}) => ({one});")
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                lines.append(f"assert all1 p: ~(p in {a} & p in {b});")
        lines += self.defs
        # the empty input (n = R) is decided here rather than left to the encoding
        empty = "true" if at_empty else "false"
        lines.append(f"(n = {self.reserved} & {empty}) | (n > {self.reserved} & ({body}));")
        return "\n".join(lines) + "\n"


def to_mona(f: fo.Formula) -> str:
    """WS1S text whose satisfying assignments are the words satisfying `f`."""
    return MonaEmitter(f).script()


def decode_model(text: str, f: fo.Formula) -> str | None:
    """Read a word back from MONA's satisfying example, if one is printed."""
    em = MonaEmitter(f)
    m = re.search(r"satisfying example.*?:\s*\n(.*?)(?:\n\s*\n|\Z)", text, re.S)
    if not m:
        return None
    vals = dict(re.findall(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+?)\s*$", m.group(1), re.M))
    if "n" not in vals:
        return None
    n = int(vals["n"])
    rev = {v: k for k, v in em.letters.items()}
    word = [BLANK] * (n - em.reserved)
    for name, letter in rev.items():
        raw = vals.get(name, "{}").strip("{} ")
        for p in filter(None, (s.strip() for s in raw.split(","))):
            k = int(p) - em.reserved
            if 0 <= k < len(word):
                word[k] = letter
    return "".join(word)
