"""Command line: check, run, compile, verify, metrics, report."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fo
from .backends import mona, smtlib
from .backends.solver import BACKENDS, DEFAULT_TIMEOUT, Invalid, Unknown, Valid, verdict_name
from .errors import PolycheckError
from .interp import show_interpretation
from .interpreter import format_nested, format_value, run_word
from .pipeline import compile_program, load_program, read_program_text, verify
from .pretty import show_program
from .rewriter import PASSES, run_passes
from .simple import show_simple
from .specdsl import parse_spec
from .typecheck import typecheck_program

EXIT_VALID, EXIT_INVALID, EXIT_UNKNOWN, EXIT_USER = 0, 1, 2, 3
DEFAULT_BACKENDS = "automata,smtlib-z3,smtlib-cvc5,mona"


def _backends(text: str) -> list[str]:
    names = [b.strip() for b in text.split(",") if b.strip()]
    bad = [b for b in names if b not in BACKENDS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"backends must be among {', '.join(BACKENDS)}")
    return names


def _positive(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _maxlen(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


class _Parser(argparse.ArgumentParser):
    # usage errors are user errors (exit 3), keeping 2 for Unknown verdicts
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="polycheck", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="parse and typecheck a program")
    p.add_argument("program", help="a .pr file or the name of a bundled corpus program")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("run", help="run a program on an input word")
    p.add_argument("program")
    p.add_argument("--input", required=True)
    p.add_argument("--function", default=None, help="function to run (default: main)")
    p.add_argument("--format", choices=["separators", "json-like-nested"], default="separators",
                   help="nested outputs: '#'-separated words, or bracketed lists of quoted words")

    p = sub.add_parser("compile", help="print an intermediate form")
    p.add_argument("program")
    p.add_argument("--emit", choices=["simple", "interp", "smtlib", "mona"], default="simple")
    p.add_argument("--dump-pass", choices=list(PASSES), default=None,
                   help="print the high-level program after this rewriting pass instead")
    p.add_argument("--pre", default="true", help="precondition (for smtlib/mona)")
    p.add_argument("--post", default="true", help="postcondition (for smtlib/mona)")
    p.add_argument("--naive-pullback", action="store_true")

    p = sub.add_parser("verify", help="verify a Hoare triple {pre} program {post}")
    p.add_argument("program")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--backends", type=_backends, default=_backends(DEFAULT_BACKENDS),
                   help=f"comma separated, from {', '.join(BACKENDS)} (default {DEFAULT_BACKENDS})")
    p.add_argument("--timeout", type=_positive, default=DEFAULT_TIMEOUT, help="seconds per backend")
    p.add_argument("--maxlen", type=_maxlen, default=6, help="word length bound for the bounded backend")
    p.add_argument("--dump-chi", metavar="PATH", default=None, help="write χ in the spec language")
    p.add_argument("--naive-pullback", action="store_true")
    p.add_argument("--wait-all", action="store_true", help="let every backend finish")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("metrics", help="size, loop depth, boolean depth and quantifier rank")
    p.add_argument("programs", nargs="+")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("report", help="metrics and verification tables as CSV plus figures")
    p.add_argument("--out", default="report", help="output directory")
    p.add_argument("--programs", nargs="*", default=None, help="default: the whole corpus")
    p.add_argument("--backends", type=_backends, default=_backends(DEFAULT_BACKENDS))
    p.add_argument("--timeout", type=_positive, default=DEFAULT_TIMEOUT)
    p.add_argument("--no-verify", action="store_true", help="skip the verification table")
    return ap


# ---------------------------------------------------------------- commands


def cmd_check(a) -> int:
    name, text = read_program_text(a.program)
    from .parser import parse_program

    tp = typecheck_program(parse_program(text))
    sigs = {f: str(s) for f, s in tp.signatures.items()}
    if a.json:
        print(json.dumps({"program": name, "ok": True, "signatures": sigs}))
    else:
        for f, s in sigs.items():
            print(f"{f} : {s}")
        print(f"{name}: ok")
    return 0


def cmd_run(a) -> int:
    p = load_program(a.program)
    typecheck_program(p)
    if a.function or a.format != "separators":
        from .interpreter import eval_program

        v = eval_program(p, a.input, a.function)
        print(format_nested(v) if a.format == "json-like-nested" else format_value(v))
    else:
        print(run_word(p, a.input))
    return 0


def cmd_compile(a) -> int:
    p = load_program(a.program)
    if a.dump_pass:
        res = run_passes(p, upto=a.dump_pass)
        sys.stdout.write(show_program(res.stages[a.dump_pass]))
        return 0
    c = compile_program(p)
    if a.emit == "simple":
        sys.stdout.write(show_simple(c.simple))
    elif a.emit == "interp":
        sys.stdout.write(show_interpretation(c.interp))
    else:
        from .pullback import build_chi

        vf = build_chi(parse_spec(a.pre), c.interp, parse_spec(a.post), naive=a.naive_pullback)
        sys.stdout.write(smtlib.to_smtlib(vf.chi) if a.emit == "smtlib" else mona.to_mona(vf.chi))
    return 0


def _verdict_json(v) -> dict:
    d = {"verdict": verdict_name(v), "backend": v.backend, "seconds": round(v.seconds, 4)}
    if isinstance(v, Invalid):
        d["counterexample"] = v.counterexample
    if isinstance(v, Unknown):
        d["reason"] = v.reason
        d["detail"] = v.detail[:500]
    return d


def cmd_verify(a) -> int:
    p = load_program(a.program)
    out = verify(p, a.pre, a.post, a.backends, a.timeout, a.maxlen, naive=a.naive_pullback, wait_all=a.wait_all)
    if a.dump_chi:
        Path(a.dump_chi).write_text(fo.to_dsl(out.vf.chi) + "\n", encoding="utf-8")
    v = out.result.verdict
    code = EXIT_VALID if isinstance(v, Valid) else EXIT_INVALID if isinstance(v, Invalid) else EXIT_UNKNOWN
    if a.json:
        print(json.dumps({
            "program": a.program, "pre": a.pre, "post": a.post,
            "verdict": _verdict_json(v),
            "backends": {b: _verdict_json(x) for b, x in out.result.verdicts.items()},
            "chi": {"qrank": out.vf.qrank, "size": out.vf.size, "dag_size": fo.dag_size(out.vf.chi)},
            "metrics": out.compiled.metrics_row(),
            "timings": {k: round(t, 4) for k, t in {**out.compiled.timings, "solve": out.seconds}.items()},
            "exit": code,
        }, ensure_ascii=False))
        return code
    for b, x in out.result.verdicts.items():
        extra = ""
        if isinstance(x, Invalid):
            extra = f" counterexample={x.counterexample!r}"
        elif isinstance(x, Unknown):
            extra = " (cancelled)" if x.detail == "cancelled" else f" ({x.reason})"
        print(f"{b:12s} {verdict_name(x)}{extra} [{x.seconds:.2f}s]")
    m = out.compiled.metrics_row()
    print(f"chi: qrank {out.vf.qrank} size {out.vf.size}")
    print("metrics: " + " ".join(f"{k}={val}" for k, val in m.items()))
    if isinstance(v, Invalid):
        print(f"INVALID: counterexample {v.counterexample!r}")
    else:
        print({Valid: "VALID", Unknown: "UNKNOWN"}[type(v)])
    if out.result.disagreement():
        print("warning: backends disagree", file=sys.stderr)
    return code


METRIC_COLUMNS = ["program", "fp_size", "fp_ld", "fp_bd", "sfp_size", "sfp_ld", "sfp_bd", "foi_size", "foi_qr"]


def cmd_metrics(a) -> int:
    rows = []
    for prog in a.programs:
        name, _ = read_program_text(prog)
        rows.append({"program": name, **compile_program(load_program(prog)).metrics_row()})
    if a.json:
        print(json.dumps(rows))
    else:
        print("\t".join(METRIC_COLUMNS))
        for r in rows:
            print("\t".join(str(r[c]) for c in METRIC_COLUMNS))
    return 0


def cmd_report(a) -> int:
    from .report import write_report

    paths = write_report(Path(a.out), a.programs, a.backends, a.timeout, verify_table=not a.no_verify)
    for p in paths:
        print(p)
    return 0


COMMANDS = {"check": cmd_check, "run": cmd_run, "compile": cmd_compile, "verify": cmd_verify,
            "metrics": cmd_metrics, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return COMMANDS[a.cmd](a)
    except PolycheckError as e:
        print(f"error[{e.stage}]: {e}", file=sys.stderr)
        return EXIT_USER
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
