import os
import shutil
from pathlib import Path

import pytest
from hypothesis import given, settings

from polycheck import BLANK, fo
from polycheck.backends import automata
from polycheck.backends.mona import decode_model as mona_decode
from polycheck.backends.mona import to_mona
from polycheck.backends.smtlib import decode_model as smt_decode
from polycheck.backends.smtlib import to_smtlib
from polycheck.backends.solver import Invalid, SolverTask, Unknown, Valid, replay, run_portfolio, run_solver
from polycheck.pullback import build_chi
from polycheck.specdsl import parse_spec

from conftest import compiled, program
from script_eval import mona_holds, smtlib_holds
from test_fo import build, closed_trees

GOLDEN = Path(__file__).parent / "golden"
HAVE_Z3 = shutil.which("z3") is not None

EXISTS_A = "exists x. label(x) == 'a'"
EXISTS_B = "exists x. label(x) == 'b'"


def triple(name, pre, post):
    return build_chi(parse_spec(pre), compiled(name).interp, parse_spec(post))


def words(letters, n):
    return list(fo.words_over(letters, n))


# ---------------------------------------------------------------- emitted text

GOLDEN_CASES = {
    "as_to_bs": ("as_to_bs", 'starts_with("a")', "not (" + EXISTS_A + ")"),
    "get_first_word": ("get_first_word", EXISTS_B, EXISTS_A),
}


@pytest.mark.parametrize("case", sorted(GOLDEN_CASES))
@pytest.mark.parametrize("ext,emit", [("smt2", to_smtlib), ("mona", to_mona)])
def test_golden_scripts(case, ext, emit):
    text = emit(triple(*GOLDEN_CASES[case]).chi)
    path = GOLDEN / f"{case}.{ext}"
    if os.environ.get("POLYCHECK_REGEN_GOLDEN"):
        path.parent.mkdir(exist_ok=True)
        path.write_text(text)
    assert text == path.read_text()


def test_smtlib_header():
    text = to_smtlib(fo.exists("x", fo.letter("x", "a")))
    lines = text.splitlines()
    assert lines[0] == "(set-logic UFDTLIA)"
    assert lines[-2:] == ["(check-sat)", "(get-model)"]
    assert "(declare-fun w (Int) Letter)" in lines


def test_open_formulas_rejected():
    for emit in (to_smtlib, to_mona):
        with pytest.raises(ValueError):
            emit(fo.letter("x", "a"))


@pytest.mark.parametrize("name", ["as_to_bs", "identity", "reverse", "get_first_word"])
def test_scripts_agree_with_chi(name):
    chi = triple(name, EXISTS_B, EXISTS_A).chi
    m, s = to_mona(chi), to_smtlib(chi)
    for w in words("ab" + BLANK, 3):
        e = fo.eval_formula(chi, w)
        assert mona_holds(m, w) == e and smtlib_holds(s, w) == e, w


@settings(max_examples=80, deadline=None)
@given(closed_trees)
def test_scripts_agree_on_generated_formulas(t):
    f = build(t)
    m, s = to_mona(f), to_smtlib(f)
    for w in words("ab" + BLANK, 2):
        e = fo.eval_formula(f, w)
        assert mona_holds(m, w) == e and smtlib_holds(s, w) == e, w


def test_smtlib_model_decoding():
    f = fo.exists("x", fo.letter("x", "a"))
    z3_style = "sat\n(\n  (define-fun len () Int 2)\n  (define-fun w ((x!0 Int)) Letter (ite (= x!0 1) L_a L_blank))\n)\n"
    assert smt_decode(z3_style, f) == BLANK + "a"
    let_style = "sat\n(model (define-fun len () Int (+ 1 1)) (define-fun w ((i Int)) Letter (let ((k (- i 1))) " \
                "(ite (= k 0) L_a L_blank))))"
    assert smt_decode(let_style, f) == BLANK + "a"
    assert smt_decode("sat\n(garbage", f) is None


def test_mona_model_decoding():
    f = fo.exists("x", fo.letter("x", "a"))
    out = "ANALYSIS\nFormula is satisfiable\n\nA satisfying example of least length (3) is:\nn = 2\n" \
          "L_a = {1}\nL_blank = {0}\n\n"
    assert mona_decode(out, f) == BLANK + "a"
    assert mona_decode("Formula is unsatisfiable\n", f) is None


# ---------------------------------------------------------------- automata backend


@settings(max_examples=100, deadline=None)
@given(closed_trees)
def test_automata_agrees_with_bounded_search(t):
    f = build(t)
    sat, word, _ = automata.decide(f)
    r = fo.bounded_sat(f, 3)
    if isinstance(r, fo.Sat):
        assert sat
    if sat:
        assert fo.eval_formula(f, word)
    else:
        assert isinstance(r, fo.NoWitnessUpTo)


def test_automata_examples():
    assert automata.decide(fo.FALSE)[0] is False
    sat, word, _ = automata.decide(fo.exists("x", fo.letter("x", "a")))
    assert sat and word == "a"
    f = fo.conj(parse_spec('starts_with("a")'), parse_spec('ends_with("b")'))
    sat, word, _ = automata.decide(f)
    assert sat and word == "ab"


def test_automata_shortest_counterexample():
    vf = triple("get_last_word", 'ends_with("a")', EXISTS_B)
    sat, word, _ = automata.decide(vf.chi)
    assert sat and replay(vf, word, program("get_last_word"))
    assert fo.bounded_sat(vf.chi, len(word) - 1) == fo.NoWitnessUpTo(len(word) - 1)


def test_automata_state_limit():
    vf = triple("compress_as", 'contains_factor("ab")', 'contains_factor("ab")')
    with pytest.raises(automata.StateLimit):
        automata.decide(vf.chi, max_states=5)


# ---------------------------------------------------------------- drivers


def test_automata_driver_proves_as_to_bs():
    vf = triple("as_to_bs", "true", "not (" + EXISTS_A + ")")
    v = run_solver(SolverTask(vf, "automata", timeout=30))
    assert isinstance(v, Valid)


def test_bounded_driver():
    vf = triple("get_last_word", 'ends_with("a")', 'contains_factor("aa")')
    v = run_solver(SolverTask(vf, "bounded", timeout=30, maxlen=4, program=program("get_last_word")))
    assert isinstance(v, Invalid) and replay(vf, v.counterexample)
    vf = triple("as_to_bs", "true", "not (" + EXISTS_A + ")")
    v = run_solver(SolverTask(vf, "bounded", timeout=30, maxlen=3))
    assert isinstance(v, Unknown) and v.reason == "solver-unknown"


def test_missing_solver(tmp_path):
    vf = triple("as_to_bs", "true", EXISTS_A)
    for backend in ("smtlib-z3", "mona"):
        v = run_solver(SolverTask(vf, backend, binary=str(tmp_path / "nope")))
        assert isinstance(v, Unknown) and v.reason == "solver-missing"


def test_timeout():
    vf = triple("compress_as", 'contains_factor("ab")', 'contains_factor("ab")')
    v = run_solver(SolverTask(vf, "automata", timeout=0.001))
    assert isinstance(v, Unknown) and v.reason == "timeout"


def test_bad_task():
    vf = triple("identity", "true", "true")
    with pytest.raises(ValueError):
        SolverTask(vf, "automata", timeout=0)
    with pytest.raises(ValueError):
        SolverTask(vf, "nosuch")


def test_fake_counterexample_fails_replay(tmp_path):
    # a "solver" that claims sat with a bogus model
    fake = tmp_path / "fake-z3"
    fake.write_text("#!/bin/sh\necho sat\necho '((define-fun len () Int 1) (define-fun w ((i Int)) Letter L_b))'\n")
    fake.chmod(0o755)
    vf = triple("as_to_bs", "true", "not (" + EXISTS_A + ")")
    v = run_solver(SolverTask(vf, "smtlib-z3", binary=str(fake)))
    assert isinstance(v, Unknown) and "replay" in v.detail


@pytest.mark.skipif(not HAVE_Z3, reason="z3 not installed")
def test_z3_parses_and_solves():
    vf = triple("get_last_word", 'ends_with("a")', EXISTS_B)
    v = run_solver(SolverTask(vf, "smtlib-z3", timeout=30, program=program("get_last_word")))
    assert isinstance(v, Invalid)
    assert replay(vf, v.counterexample, program("get_last_word"))
    vf = triple("as_to_bs", "true", "not (" + EXISTS_A + ")")
    assert isinstance(run_solver(SolverTask(vf, "smtlib-z3", timeout=30)), Valid)


@pytest.mark.skipif(not HAVE_Z3, reason="z3 not installed")
@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_z3_accepts_golden_files(name):
    import subprocess

    out = subprocess.run(["z3", str(GOLDEN / f"{name}.smt2")], capture_output=True, text=True, timeout=60).stdout
    assert out.split()[0] in ("sat", "unsat")


def test_portfolio_agreement():
    vf = triple("as_to_bs", "true", "not (" + EXISTS_A + ")")
    r = run_portfolio(vf, ["automata", "bounded", "smtlib-z3"], timeout=20, maxlen=3, wait_all=True)
    assert isinstance(r.verdict, Valid) and not r.disagreement()
    vf = triple("get_last_word", 'ends_with("a")', EXISTS_B)
    r = run_portfolio(vf, ["automata", "bounded"], timeout=20, maxlen=4, wait_all=True,
                      program=program("get_last_word"))
    assert isinstance(r.verdict, Invalid) and not r.disagreement()
    assert all(isinstance(v, Invalid) for v in r.verdicts.values())


def test_portfolio_all_missing(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYCHECK_MONA", str(tmp_path / "nope"))
    vf = triple("identity", "true", EXISTS_A)
    r = run_portfolio(vf, ["mona"], timeout=2)
    assert isinstance(r.verdict, Unknown) and r.verdict.reason == "solver-missing"
