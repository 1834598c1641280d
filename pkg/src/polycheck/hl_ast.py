"""AST of high-level for-programs.

Nodes are frozen dataclasses compared by value; source spans ride along
but never take part in equality.  Generator nodes (`ListGen`, `BoolGen`)
and address terms (`Addr`) never come out of the parser: they are
introduced by the rewriting passes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Node:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class TBool:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class TOut:
    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("negative output depth")

    def __str__(self) -> str:
        s = "Char"
        for _ in range(self.depth):
            s = f"[{s}]"
        return s


@dataclass(frozen=True)
class TPos:
    origin: object  # binding key of the list the index walks over

    def __str__(self) -> str:
        return f"Pos[{self.origin}]"


HLType = Union[TBool, TOut, TPos]


# ---------------------------------------------------------- constants


@dataclass(frozen=True)
class CChar(Node):
    char: str


@dataclass(frozen=True)
class CList(Node):
    items: tuple["CExpr", ...]


CExpr = Union[CChar, CList]


def cdepth(c: CExpr) -> int:
    if isinstance(c, CChar):
        return 0
    if not c.items:
        return 1
    return 1 + cdepth(c.items[0])


def clist_of_string(s: str) -> CList:
    return CList(tuple(CChar(ch) for ch in s))


# ---------------------------------------------------------- list expressions


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    value: CExpr


@dataclass(frozen=True)
class OList(Node):
    items: tuple["OExpr", ...]


@dataclass(frozen=True)
class Arg(Node):
    expr: "OExpr"
    positions: tuple[str, ...] = ()


@dataclass(frozen=True)
class Call(Node):
    fname: str
    args: tuple[Arg, ...]


@dataclass(frozen=True)
class ListGen(Node):
    body: "Stmt"
    depth: int


OExpr = Union[Var, Const, OList, Call, ListGen]


# ---------------------------------------------------------- boolean expressions


@dataclass(frozen=True)
class Addr:
    """Symbolic index into the output of a generator.

    `site` numbers the yield statement in source order; `coords` lists
    (loop id, backward?, position term) for the loops enclosing the yield,
    outermost first.
    """

    site: int
    coords: tuple[tuple[int, bool, "PosTerm"], ...]


PosTerm = Union[str, Addr]


@dataclass(frozen=True)
class BConst(Node):
    value: bool


@dataclass(frozen=True)
class BVar(Node):
    name: str


@dataclass(frozen=True)
class BNot(Node):
    arg: "BExpr"


BOOL_OPS = ("and", "or", "=>", "<=>")
POS_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class BBin(Node):
    op: str
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class PosCmp(Node):
    op: str
    left: PosTerm
    right: PosTerm


@dataclass(frozen=True)
class BCall(Node):
    fname: str
    args: tuple[Arg, ...]


@dataclass(frozen=True)
class LitEq(Node):
    left: OExpr
    right: OExpr


@dataclass(frozen=True)
class BoolGen(Node):
    body: "Stmt"


BExpr = Union[BConst, BVar, BNot, BBin, PosCmp, BCall, LitEq, BoolGen]


# ---------------------------------------------------------- statements


@dataclass(frozen=True)
class If(Node):
    cond: BExpr
    then: "Stmt"
    els: "Stmt"


@dataclass(frozen=True)
class Yield(Node):
    expr: OExpr


@dataclass(frozen=True)
class Return(Node):
    expr: Union[OExpr, BExpr]


@dataclass(frozen=True)
class LetOut(Node):
    name: str
    expr: OExpr
    body: "Stmt"


@dataclass(frozen=True)
class LetBool(Node):
    name: str
    body: "Stmt"


@dataclass(frozen=True)
class SetTrue(Node):
    name: str


@dataclass(frozen=True)
class For(Node):
    pos: str
    elem: str
    iter: OExpr
    body: "Stmt"
    backward: bool = False


@dataclass(frozen=True)
class Assign(Node):
    """Surface-only assignment other than `b := True`; always rejected."""

    name: str
    value: object


@dataclass(frozen=True)
class Seq(Node):
    stmts: tuple["Stmt", ...]


@dataclass(frozen=True)
class Skip(Node):
    pass


Stmt = Union[If, Yield, Return, LetOut, LetBool, SetTrue, For, Seq, Skip, Assign]


def seq(*stmts: Stmt) -> Stmt:
    """Flattening sequence constructor; drops `skip` in non-trivial sequences."""
    flat: list[Stmt] = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        elif isinstance(s, Skip):
            continue
        else:
            flat.append(s)
    if not flat:
        return Skip()
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def stmts_of(s: Stmt) -> tuple[Stmt, ...]:
    if isinstance(s, Seq):
        return s.stmts
    if isinstance(s, Skip):
        return ()
    return (s,)


# ---------------------------------------------------------- programs


@dataclass(frozen=True)
class Param(Node):
    name: str
    type: Union[TBool, TOut]
    positions: tuple[str, ...] = ()


@dataclass(frozen=True)
class Function(Node):
    name: str
    params: tuple[Param, ...]
    ret: Union[TBool, TOut]
    body: Stmt


@dataclass(frozen=True)
class Program(Node):
    functions: tuple[Function, ...]
    main: str

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def main_function(self) -> Function:
        return self.function(self.main)


# ---------------------------------------------------------- traversal helpers


def iter_nodes(node):
    """Pre-order walk over every AST node reachable from `node`."""
    stack = [node]
    while stack:
        n = stack.pop()
        if n is None or isinstance(n, (str, bool, int)):
            continue
        if isinstance(n, tuple):
            stack.extend(reversed(n))
            continue
        yield n
        if isinstance(n, Addr):
            stack.extend(reversed([c[2] for c in n.coords]))
            continue
        children = []
        for fname in getattr(n, "__dataclass_fields__", {}):
            if fname == "span":
                continue
            children.append(getattr(n, fname))
        stack.extend(reversed(children))


def letters_of(node) -> set[str]:
    """All character constants occurring under `node`."""
    return {n.char for n in iter_nodes(node) if isinstance(n, CChar)}


def contains_generators(node) -> bool:
    return any(isinstance(n, (ListGen, BoolGen)) for n in iter_nodes(node))
