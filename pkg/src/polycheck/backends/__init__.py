"""Solver back ends: SMT-LIB and MONA emission, an automata decision procedure, bounded search."""
from .automata import decide
from .mona import to_mona
from .smtlib import to_smtlib
from .solver import (BACKENDS, DEFAULT_TIMEOUT, Invalid, PortfolioResult, SolverTask, Unknown, Valid, Verdict,
                     replay, run_portfolio, run_solver)

__all__ = [
    "BACKENDS", "DEFAULT_TIMEOUT", "Invalid", "PortfolioResult", "SolverTask", "Unknown", "Valid", "Verdict",
    "decide", "replay", "run_portfolio", "run_solver", "to_mona", "to_smtlib",
]
