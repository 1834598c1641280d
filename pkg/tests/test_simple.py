import pytest

from polycheck.interpreter import run_word
from polycheck.simple import Metrics, SimpleProgram, SSkip, eval_simple, metrics, parse_simple, show_simple

from conftest import CORPUS, SMALL, alphabet, compiled, program, word_corpus

REVERSE_WORDS = """\
let seen_space_top := false in
for i in input do
    let seen_space := false in
    if label(i) == ' ' then
        for j in reversed(input) do
            if j < i then
                if label(j) == ' ' then
                    seen_space := true
                endif
                if not seen_space then
                    print label(j)
                endif
            endif
        done
        print ' '
    endif
done
for j in reversed(input) do
    if label(j) == ' ' then
        seen_space_top := true
    endif
    if not seen_space_top then
        print label(j)
    endif
done
"""


def test_reverse_words_program():
    sp = parse_simple(REVERSE_WORDS)
    assert eval_simple(sp, "hello world") == "olleh dlrow"
    assert eval_simple(sp, "") == ""


def test_reverse_words_matches_high_level_version():
    sp = parse_simple(REVERSE_WORDS)
    for w in word_corpus("ab ", 5):
        assert eval_simple(sp, w) == run_word(program("map_reverse"), w)


def test_identity_on_empty_word():
    assert eval_simple(compiled("identity").simple, "") == ""


def test_compiled_subwords_on_ab():
    assert eval_simple(compiled("subwords_ab").simple, "ab") == "ab#"


def test_backward_loop_order():
    sp = parse_simple("for i in reversed(input) do\n    print label(i)\ndone\n")
    assert eval_simple(sp, "abc") == "cba"


def test_booleans_reset_per_iteration():
    sp = parse_simple("for i in input do\n    let b := false in\n    if b then\n        print 'x'\n    endif\n"
                      "    b := true\ndone\n")
    assert eval_simple(sp, "aaa") == ""


@pytest.mark.parametrize("name", SMALL)
def test_compiled_simple_program_agrees(name):
    sp = compiled(name).simple
    p = program(name)
    for w in word_corpus(alphabet(name, "a"), 4, n_random=40):
        assert eval_simple(sp, w) == run_word(p, w)


@pytest.mark.parametrize("name", CORPUS)
def test_text_round_trip(name):
    sp = compiled(name).simple
    assert parse_simple(show_simple(sp)) == sp


def test_round_trip_of_handwritten_program():
    sp = parse_simple(REVERSE_WORDS)
    assert parse_simple(show_simple(sp)) == sp


# ---------------------------------------------------------------- metrics


def test_identity_metrics():
    m = metrics(compiled("identity").simple)
    assert m.bool_depth == 0 and 1 <= m.loop_depth <= 2


def test_empty_program_metrics():
    assert metrics(SimpleProgram((), SSkip())) == Metrics(0, 0, 0)


def scope_walk_bool_depth(text):
    """Max number of `let` declarations in scope over all lines of the program text."""
    open_lets: list[tuple[int, int]] = []
    best = 0
    for line in text.splitlines():
        indent = len(line) - len(line.lstrip(" "))
        while open_lets and open_lets[-1][0] > indent:
            open_lets.pop()
        if line.lstrip().startswith("let "):
            names = line.split(":=")[0].strip()[len("let "):]
            open_lets.append((indent, len(names.split(","))))
        best = max(best, sum(n for _, n in open_lets))
    return best


@pytest.mark.parametrize("name", CORPUS)
def test_bool_depth_matches_scope_walk(name):
    sp = compiled(name).simple
    assert metrics(sp).bool_depth == scope_walk_bool_depth(show_simple(sp))


def test_scope_walk_on_reverse_words():
    assert scope_walk_bool_depth(REVERSE_WORDS) == 2
    assert metrics(parse_simple(REVERSE_WORDS)).bool_depth == 2
    assert metrics(parse_simple(REVERSE_WORDS)).loop_depth == 2


@pytest.mark.parametrize("name", CORPUS)
def test_metric_invariants(name):
    for m in (metrics(program(name)), metrics(compiled(name).simple)):
        assert min(m.size, m.loop_depth, m.bool_depth) >= 0
        assert m.loop_depth <= m.size
