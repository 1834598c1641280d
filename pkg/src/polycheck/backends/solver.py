"""Running verification formulas through solvers and reading verdicts.

χ is unsatisfiable exactly when the Hoare triple holds, so ``unsat`` maps to
Valid and ``sat`` to Invalid.  Every counterexample is replayed on the
program (or, lacking one, on the interpretation) before it is reported.
"""
from __future__ import annotations

import multiprocessing as mp
import os
import shutil
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .. import fo
from ..interp import eval_interpretation
from ..pullback import VerificationFormula
from . import automata, mona, smtlib

BACKENDS = ("smtlib-z3", "smtlib-cvc5", "mona", "automata", "bounded")
DEFAULT_TIMEOUT = 5.0
UNKNOWN_REASONS = ("timeout", "memout", "solver-unknown", "solver-missing")


@dataclass(frozen=True)
class Valid:
    backend: str = ""
    seconds: float = 0.0


@dataclass(frozen=True)
class Invalid:
    counterexample: Optional[str] = None
    backend: str = ""
    seconds: float = 0.0


@dataclass(frozen=True)
class Unknown:
    reason: str = "solver-unknown"
    detail: str = ""
    backend: str = ""
    seconds: float = 0.0


Verdict = Union[Valid, Invalid, Unknown]


def verdict_name(v: Verdict) -> str:
    return type(v).__name__


def conclusive(v: Verdict) -> bool:
    return not isinstance(v, Unknown)


@dataclass
class SolverTask:
    vf: VerificationFormula
    backend: str
    timeout: float = DEFAULT_TIMEOUT
    maxlen: int = 6
    program: object = None  # HL program used to replay counterexamples
    binary: Optional[str] = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; choose from {', '.join(BACKENDS)}")


# ---------------------------------------------------------------- replay


def replay(vf: VerificationFormula, word: str, program=None) -> bool:
    """True when `word` satisfies the precondition and its output violates the postcondition."""
    if not fo.eval_formula(vf.pre, word):
        return False
    if program is not None:
        from ..interpreter import run_word

        out = run_word(program, word)
    else:
        out = eval_interpretation(vf.interp, word)
    return not fo.eval_formula(vf.post, out)


def _checked(task: SolverTask, word: Optional[str], seconds: float) -> Verdict:
    if word is None:
        return Invalid(None, task.backend, seconds)
    if replay(task.vf, word, task.program):
        return Invalid(word, task.backend, seconds)
    return Unknown("solver-unknown", f"counterexample {word!r} failed replay", task.backend, seconds)


# ---------------------------------------------------------------- binaries


def find_binary(backend: str, override: Optional[str] = None) -> Optional[list[str]]:
    """Command prefix for an external backend, or None when it is missing."""
    env = {"smtlib-z3": "POLYCHECK_Z3", "smtlib-cvc5": "POLYCHECK_CVC5", "mona": "POLYCHECK_MONA"}[backend]
    path = override or os.environ.get(env)
    if path:
        return [path] if shutil.which(path) or os.access(path, os.X_OK) else None
    name = {"smtlib-z3": "z3", "smtlib-cvc5": "cvc5", "mona": "mona"}[backend]
    found = shutil.which(name)
    if found:
        return [found]
    if backend == "smtlib-cvc5":
        try:
            import cvc5  # noqa: F401
        except ImportError:
            return None
        return [sys.executable, "-m", "polycheck.backends.cvc5_cli"]
    return None


# ---------------------------------------------------------------- processes


class _Cancel:
    """Shared cancellation flag plus the live processes it should stop."""

    def __init__(self):
        self.event = threading.Event()
        self.lock = threading.Lock()
        self.procs: list = []

    def register(self, p) -> bool:
        with self.lock:
            if self.event.is_set():
                return False
            self.procs.append(p)
            return True

    def fire(self):
        with self.lock:
            self.event.set()
            procs = list(self.procs)
        for p in procs:
            try:
                p.kill()
            except Exception:
                pass


def _run_process(cmd: list[str], timeout: float, cancel: Optional[_Cancel]):
    """(stdout, stderr, status) where status is ok / timeout / cancelled."""
    proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    if cancel is not None and not cancel.register(proc):
        proc.kill()
        proc.communicate()
        return "", "", "cancelled"
    try:
        out, err = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        proc.kill()
        out, err = proc.communicate()
        return out, err, "timeout"
    if cancel is not None and cancel.event.is_set():
        return out, err, "cancelled"
    return out, err, "ok"


def _child(conn, fn, args):
    try:
        conn.send(("ok", fn(*args)))
    except MemoryError:
        conn.send(("memout", None))
    except automata.StateLimit as e:
        conn.send(("memout", f"automaton exceeded {e.args[0]} states"))
    except Exception as e:  # reported as solver-unknown
        conn.send(("error", f"{type(e).__name__}: {e}"))
    finally:
        conn.close()


def _run_inprocess(fn: Callable, args: tuple, timeout: float, cancel: Optional[_Cancel]):
    """Run fn(*args) in a forked child so that timeouts can kill it."""
    ctx = mp.get_context("fork")
    recv, send = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_child, args=(send, fn, args), daemon=True)
    proc.start()
    send.close()
    if cancel is not None and not cancel.register(proc):
        proc.kill()
        proc.join()
        return "cancelled", None
    try:
        if recv.poll(timeout):
            status, value = recv.recv()
        else:
            status, value = "timeout", None
    except EOFError:
        status, value = ("cancelled", None) if cancel is not None and cancel.event.is_set() else ("memout", "worker died")
    proc.kill()
    proc.join()
    recv.close()
    return status, value


# ---------------------------------------------------------------- backends


def _smt(task: SolverTask, cancel) -> Verdict:
    cmd = find_binary(task.backend, task.binary)
    if cmd is None:
        return Unknown("solver-missing", f"no binary for {task.backend}", task.backend)
    chi = task.vf.chi
    text = smtlib.to_smtlib(chi)
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(text)
        path = fh.name
    t0 = time.monotonic()
    try:
        out, err, status = _run_process(cmd + [path], task.timeout, cancel)
    except OSError as e:
        return Unknown("solver-missing", str(e), task.backend)
    finally:
        os.unlink(path)
    dt = time.monotonic() - t0
    if status != "ok":
        return Unknown("timeout", status, task.backend, dt)
    first = out.strip().splitlines()[0].strip() if out.strip() else ""
    if first == "unsat":
        return Valid(task.backend, dt)
    if first == "sat":
        return _checked(task, smtlib.decode_model(out, chi), dt)
    if "memout" in out or "out of memory" in (out + err).lower():
        return Unknown("memout", out.strip() or err.strip(), task.backend, dt)
    return Unknown("solver-unknown", (out.strip() or err.strip())[:2000], task.backend, dt)


def _mona(task: SolverTask, cancel) -> Verdict:
    cmd = find_binary("mona", task.binary)
    if cmd is None:
        return Unknown("solver-missing", "no MONA binary (set POLYCHECK_MONA)", task.backend)
    chi = task.vf.chi
    with tempfile.NamedTemporaryFile("w", suffix=".mona", delete=False) as fh:
        fh.write(mona.to_mona(chi))
        path = fh.name
    t0 = time.monotonic()
    try:
        out, err, status = _run_process(cmd + ["-q", path], task.timeout, cancel)
    except OSError as e:
        return Unknown("solver-missing", str(e), task.backend)
    finally:
        os.unlink(path)
    dt = time.monotonic() - t0
    if status != "ok":
        return Unknown("timeout", status, task.backend, dt)
    low = out.lower()
    if "formula is unsatisfiable" in low:
        return Valid(task.backend, dt)
    if "satisfying example" in low or "formula is valid" in low:
        return _checked(task, mona.decode_model(out, chi), dt)
    return Unknown("solver-unknown", (out.strip() or err.strip())[:2000], task.backend, dt)


def _decide(chi):
    return automata.decide(chi)


def _automata(task: SolverTask, cancel) -> Verdict:
    t0 = time.monotonic()
    status, value = _run_inprocess(_decide, (task.vf.chi,), task.timeout, cancel)
    dt = time.monotonic() - t0
    if status == "ok":
        sat, word, _largest = value
        return _checked(task, word, dt) if sat else Valid(task.backend, dt)
    if status == "memout":
        return Unknown("memout", value or "", task.backend, dt)
    if status == "error":
        return Unknown("solver-unknown", value, task.backend, dt)
    return Unknown("timeout", status, task.backend, dt)


def _bounded_search(chi, maxlen):
    r = fo.bounded_sat(chi, maxlen)
    return r.witness if isinstance(r, fo.Sat) else None


def _bounded(task: SolverTask, cancel) -> Verdict:
    """Exhaustive search: Invalid when a word is found, Valid only when χ is literally false."""
    if task.vf.chi is fo.FALSE:
        return Valid(task.backend, 0.0)
    t0 = time.monotonic()
    status, value = _run_inprocess(_bounded_search, (task.vf.chi, task.maxlen), task.timeout, cancel)
    dt = time.monotonic() - t0
    if status == "ok":
        if value is None:
            return Unknown("solver-unknown", f"no counterexample up to length {task.maxlen}", task.backend, dt)
        return _checked(task, value, dt)
    if status == "error":
        return Unknown("solver-unknown", value, task.backend, dt)
    return Unknown("memout" if status == "memout" else "timeout", status, task.backend, dt)


_RUNNERS = {"smtlib-z3": _smt, "smtlib-cvc5": _smt, "mona": _mona, "automata": _automata, "bounded": _bounded}


def run_solver(task: SolverTask, cancel: Optional[_Cancel] = None) -> Verdict:
    return _RUNNERS[task.backend](task, cancel)


# ---------------------------------------------------------------- portfolio


@dataclass
class PortfolioResult:
    verdict: Verdict
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    def disagreement(self) -> bool:
        kinds = {type(v) for v in self.verdicts.values() if conclusive(v)}
        return len(kinds) > 1


def run_portfolio(vf: VerificationFormula, backends, timeout: float = DEFAULT_TIMEOUT, maxlen: int = 6,
                  program=None, wait_all: bool = False) -> PortfolioResult:
    """Run several backends concurrently; the first conclusive verdict wins.

    With ``wait_all`` every backend runs to completion (used to check
    cross-backend agreement).
    """
    backends = list(dict.fromkeys(backends))
    if not backends:
        raise ValueError("at least one backend is required")
    cancel = _Cancel()
    lock = threading.Lock()
    results: dict[str, Verdict] = {}
    winner: list[Verdict] = []

    def work(b):
        v = run_solver(SolverTask(vf, b, timeout, maxlen, program), cancel)
        with lock:
            results[b] = v
            if conclusive(v) and not winner:
                winner.append(v)
                if not wait_all:
                    cancel.event.set()
        if winner and not wait_all:
            cancel.fire()

    threads = [threading.Thread(target=work, args=(b,), daemon=True) for b in backends]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if winner:
        best = winner[0]
    else:
        best = next((results[b] for b in backends if results[b].reason != "solver-missing"), results[backends[0]])
    return PortfolioResult(best, {b: results[b] for b in backends})
