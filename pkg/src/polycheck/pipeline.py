"""End-to-end helpers shared by the command line and the test-suite."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import fo
from .backends.solver import DEFAULT_TIMEOUT, PortfolioResult, run_portfolio
from .hl_ast import Program
from .interp import Interpretation, compile_interpretation
from .parser import parse_program
from .pullback import VerificationFormula, build_chi
from .rewriter import run_passes
from .simple import Metrics, SimpleProgram, metrics
from .specdsl import parse_spec
from .typecheck import check_verifiable, typecheck_program


def corpus_names() -> list[str]:
    root = resources.files("polycheck") / "corpus"
    return sorted(p.name[:-3] for p in root.iterdir() if p.name.endswith(".pr"))


def read_program_text(path_or_name: str) -> tuple[str, str]:
    """(name, source) for a file path or the name of a bundled corpus program."""
    p = Path(path_or_name)
    if p.exists():
        return p.stem, p.read_text(encoding="utf-8")
    name = path_or_name[:-3] if path_or_name.endswith(".pr") else path_or_name
    res = resources.files("polycheck") / "corpus" / f"{name}.pr"
    if res.is_file():
        return name, res.read_text(encoding="utf-8")
    raise FileNotFoundError(f"no such program file or corpus entry: {path_or_name}")


def load_program(path_or_name: str) -> Program:
    return parse_program(read_program_text(path_or_name)[1])


# the verification benchmarks: (program, precondition, postcondition)
TABLE2 = [
    ("compress_as", 'contains_factor("ab")', 'contains_factor("ab")'),
    ("reverse_add_hash", 'contains_factor("ab")', 'contains_factor("ba")'),
    ("get_last_word", 'ends_with("a")', 'contains_factor("aa")'),
    ("subwords_ab", 'contains_factor("ab")', 'contains_factor("ab")'),
    ("map_reverse", 'ends_with("a")', 'starts_with("a")'),
]


@dataclass
class Compiled:
    program: Program
    simple: SimpleProgram
    interp: Interpretation
    timings: dict = field(default_factory=dict)

    def metrics_row(self) -> dict:
        fp: Metrics = metrics(self.program)
        sfp: Metrics = metrics(self.simple)
        return {
            "fp_size": fp.size, "fp_ld": fp.loop_depth, "fp_bd": fp.bool_depth,
            "sfp_size": sfp.size, "sfp_ld": sfp.loop_depth, "sfp_bd": sfp.bool_depth,
            "foi_size": self.interp.size(), "foi_qr": self.interp.qrank(),
        }


def compile_program(p: Program) -> Compiled:
    t0 = time.perf_counter()
    tp = typecheck_program(p)
    check_verifiable(tp)
    t1 = time.perf_counter()
    sp = run_passes(tp).simple
    t2 = time.perf_counter()
    interp = compile_interpretation(sp)
    t3 = time.perf_counter()
    return Compiled(p, sp, interp, {"typecheck": t1 - t0, "rewrite": t2 - t1, "interpret": t3 - t2})


@dataclass
class VerifyOutcome:
    compiled: Compiled
    vf: VerificationFormula
    result: PortfolioResult
    seconds: float


def verify(p: Program, pre: str | fo.Formula, post: str | fo.Formula, backends, timeout: float = DEFAULT_TIMEOUT,
           maxlen: int = 6, naive: bool = False, wait_all: bool = False, compiled: Compiled | None = None) -> VerifyOutcome:
    pre_f = parse_spec(pre) if isinstance(pre, str) else pre
    post_f = parse_spec(post) if isinstance(post, str) else post
    c = compiled or compile_program(p)
    t0 = time.perf_counter()
    vf = build_chi(pre_f, c.interp, post_f, naive=naive)
    c.timings["chi"] = time.perf_counter() - t0
    t1 = time.perf_counter()
    res = run_portfolio(vf, backends, timeout, maxlen, program=p, wait_all=wait_all)
    return VerifyOutcome(c, vf, res, time.perf_counter() - t1)
