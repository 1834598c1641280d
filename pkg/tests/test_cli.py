import csv
import json
import subprocess
import sys

import pytest

from polycheck.cli import main
from polycheck.interp import parse_interpretation, show_interpretation
from polycheck.simple import parse_simple, show_simple

from conftest import compiled


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check(capsys):
    code, out, _ = run(capsys, "check", "as_to_bs")
    assert code == 0 and out.strip().endswith("as_to_bs: ok")


def test_check_json(capsys):
    code, out, _ = run(capsys, "check", "subwords_ab", "--json")
    d = json.loads(out)
    assert code == 0 and d["ok"] and "containsAB" in d["signatures"]


def test_check_rejects_bad_program(tmp_path, capsys):
    f = tmp_path / "bad.pr"
    f.write_text("def main(w : [Char]) : [Char] :=\n    yield x\n")
    code, _, err = run(capsys, "check", str(f))
    assert code == 3 and "error[" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent/thing.pr")
    assert code == 3 and err


def test_run(capsys):
    assert run(capsys, "run", "as_to_bs", "--input", "abc")[:2] == (0, "bbc\n")


def test_run_nested_formats(capsys):
    _, out, _ = run(capsys, "run", "subwords_ab", "--input", "ab", "--function", "subwordsWithAB")
    assert out == "ab\n"
    _, out, _ = run(capsys, "run", "subwords_ab", "--input", "abb", "--function", "subwordsWithAB",
                    "--format", "json-like-nested")
    assert json.loads(out) == ["abb", "ab"]


def test_compile_simple_round_trip(capsys):
    code, out, _ = run(capsys, "compile", "compress_as", "--emit", "simple")
    assert code == 0
    assert parse_simple(out) == compiled("compress_as").simple
    assert show_simple(parse_simple(out)) == out


def test_compile_interp_round_trip(capsys):
    _, out, _ = run(capsys, "compile", "as_to_bs", "--emit", "interp")
    assert show_interpretation(parse_interpretation(out)) == out


def test_compile_solver_scripts(capsys):
    _, out, _ = run(capsys, "compile", "as_to_bs", "--emit", "smtlib", "--post", "exists x. label(x) == 'a'")
    assert out.startswith("(set-logic UFDTLIA)")
    _, out, _ = run(capsys, "compile", "as_to_bs", "--emit", "mona")
    assert out.startswith("ws1s;")


def test_dump_pass(capsys):
    code, out, _ = run(capsys, "compile", "subwords_ab", "--dump-pass", "C")
    assert code == 0 and "def " in out and "containsAB(" not in out.split("def main")[-1]


def test_metrics_identity(capsys):
    _, out, _ = run(capsys, "metrics", "identity", "--json")
    (row,) = json.loads(out)
    assert row["fp_bd"] == 0 and row["foi_qr"] == 0


def test_metrics_table(capsys):
    _, out, _ = run(capsys, "metrics", "identity", "as_to_bs")
    lines = out.splitlines()
    assert lines[0].split("\t")[0] == "program" and len(lines) == 3


def test_verify_invalid_json(capsys, tmp_path):
    chi = tmp_path / "chi.txt"
    code, out, _ = run(capsys, "verify", "get_last_word", "--pre", 'ends_with("a")', "--post",
                       'contains_factor("aa")', "--backends", "bounded", "--timeout", "60", "--json",
                       "--dump-chi", str(chi))
    d = json.loads(out)
    assert code == 1 and d["exit"] == 1 and d["verdict"]["verdict"] == "Invalid"
    assert d["verdict"]["counterexample"].endswith("a")
    assert chi.read_text().strip()


def test_verify_valid(capsys):
    code, out, _ = run(capsys, "verify", "identity", "--pre", "true", "--post", "true", "--backends", "bounded")
    assert code == 0 and "VALID" in out


def test_verify_unknown(capsys):
    code, out, _ = run(capsys, "verify", "as_to_bs", "--pre", "true", "--post", "not (exists x. label(x) == 'a')",
                       "--backends", "bounded", "--maxlen", "2")
    assert code == 2 and "UNKNOWN" in out


def test_verify_bad_spec(capsys):
    code, _, err = run(capsys, "verify", "identity", "--pre", "label(x) == 'a'", "--post", "true")
    assert code == 3 and err


def cli(*argv):
    return subprocess.run([sys.executable, "-m", "polycheck.cli", *argv], capture_output=True, text=True, timeout=120)


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["verify", "identity"], ["verify", "identity", "--pre", "true",
                                                                                "--post", "true", "--timeout", "-1"]])
def test_usage_errors_exit_3(argv):
    assert cli(*argv).returncode == 3


def test_console_script():
    from shutil import which

    exe = which("polycheck")
    if exe is None:
        pytest.skip("console script not installed")
    r = subprocess.run([exe, "run", "as_to_bs", "--input", "aa"], capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and r.stdout == "bb\n"


def test_report_without_verification(tmp_path, capsys):
    code, out, _ = run(capsys, "report", "--out", str(tmp_path), "--programs", "identity", "as_to_bs", "--no-verify")
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "metrics.csv").open()))
    assert [r["program"] for r in rows] == ["identity", "as_to_bs"]
    for png in ("sizes.png", "depth_vs_qrank.png"):
        assert (tmp_path / png).read_bytes()[:4] == b"\x89PNG"


def test_report_with_verification(tmp_path, capsys):
    code, _, _ = run(capsys, "report", "--out", str(tmp_path), "--programs", "identity", "--backends", "bounded",
                     "--timeout", "1")
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "verification.csv").open()))
    assert rows and all(r["verdict"] for r in rows)
    assert (tmp_path / "verification.png").read_bytes()[:4] == b"\x89PNG"
