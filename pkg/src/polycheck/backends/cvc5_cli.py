"""Minimal command-line front end for the cvc5 Python bindings.

Used when no ``cvc5`` executable is installed but the ``cvc5`` package is::

    python -m polycheck.backends.cvc5_cli [--option=value ...] FILE.smt2
"""
from __future__ import annotations

import sys


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    import cvc5

    tm = cvc5.TermManager()
    solver = cvc5.Solver(tm)
    path = None
    for a in argv:
        if a.startswith("--"):
            key, _, val = a[2:].partition("=")
            solver.setOption(key, val or "true")
        else:
            path = a
    if path is None:
        print("usage: cvc5_cli [--option=value] FILE", file=sys.stderr)
        return 2
    sm = cvc5.SymbolManager(tm)
    parser = cvc5.InputParser(solver, sm)
    parser.setFileInput(cvc5.InputLanguage.SMT_LIB_2_6, path)
    while True:
        cmd = parser.nextCommand()
        if cmd.isNull():
            break
        out = cmd.invoke(solver, sm)
        if out:
            sys.stdout.write(out if out.endswith("\n") else out + "\n")
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
