import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycheck import BLANK
from polycheck import hl_ast as A
from polycheck.interpreter import Evaluator, InterpreterBug, eval_program, format_nested, format_value, \
    run_word, support_constants
from polycheck.parser import parse_program

from conftest import CORPUS, alphabet, program, word_corpus


def test_as_to_bs():
    assert run_word(program("as_to_bs"), "abc") == "bbc"


def test_reverse_words():
    assert run_word(program("map_reverse"), "hello world") == "olleh dlrow"


def subwords_oracle(w):
    out = []
    for i in range(len(w)):
        for j in reversed(range(len(w))):
            s = w[i:j + 1]
            if any(s[k] == "a" and "b" in s[k + 1:] for k in range(len(s))):
                out.append(s + "#")
    return "".join(out)


def test_subwords_on_ab():
    assert run_word(program("subwords_ab"), "ab") == "ab#"


def test_subwords_against_brute_force():
    p = program("subwords_ab")
    for w in word_corpus("ab#", 5):
        assert run_word(p, w) == subwords_oracle(w)


def get_between(w, i, j):
    ev = Evaluator(program("subwords_ab"))
    return "".join(ev.call("getBetween", (A.Arg(A.Var("l"), ("i", "j")),), {"l": tuple(w), "i": i, "j": j}))


def test_get_between():
    assert get_between("abcd", 1, 2) == "bc"
    for i in range(4):
        for j in range(4):
            assert get_between("abcd", i, j) == "".join(c for k, c in enumerate("abcd") if i <= k <= j)


def test_nested_output_and_booleans():
    p = program("subwords_ab")
    v = eval_program(p, "abab", "subwordsWithAB")
    assert v == (tuple("abab"), tuple("aba"), tuple("ab"), tuple("bab"), tuple("ab"))
    assert format_value(v) == "abab#aba#ab#bab#ab"
    assert format_nested(v) == '["abab", "aba", "ab", "bab", "ab"]'
    assert eval_program(p, "ba", "containsAB") is False
    assert eval_program(p, "cab", "containsAB") is True


def test_backward_loop_visits_last_position_first():
    assert run_word(program("reverse"), "abc") == "cba"


def test_empty_word():
    for name in CORPUS:
        assert isinstance(run_word(program(name), ""), str)


def test_support_constants():
    assert support_constants(program("as_to_bs")) == {"a", "b"}
    assert support_constants(program("identity")) == set()
    assert support_constants(program("subwords_ab")) == {"a", "b", "#"}


def test_boolean_reset_is_caught():
    # not reachable from typed programs: build it directly
    body = A.LetBool("b", A.seq(A.SetTrue("b"), A.LetBool("b", A.Skip())))
    p = A.Program((A.Function("main", (A.Param("w", A.TOut(1)),), A.TOut(1), body),), "main")
    with pytest.raises(InterpreterBug):
        eval_program(p, "a")


def test_deterministic():
    p = program("map_reverse")
    for w in ["", "a b", "ab  ba"]:
        assert run_word(p, w) == run_word(p, w)


def test_return_appends_and_stops():
    p = parse_program("def main(w : [Char]) : [Char] :=\n    for (i, c) in enumerate(w) do\n"
                      "        if c === 'a' then\n            return \"x\"\n        endif\n"
                      "        yield c\n    done\n")
    # yields before the return stay in the output
    assert run_word(p, "bcad") == "bcx"
    assert run_word(p, "bcd") == "bcd"


# support property: T(f*(w)) = f*(T(w)) for renamings fixing the constants

FREE = "xyzuv"


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([n for n in CORPUS if n != "litteral_test"]), st.randoms(use_true_random=False))
def test_support_property(name, rng: random.Random):
    p = program(name)
    fixed = support_constants(p)
    pool = [c for c in FREE + BLANK if c not in fixed]
    letters = alphabet(name, pool)
    # a renaming fixing `fixed` pointwise and never mapping other letters into it
    f = {c: (c if c in fixed else rng.choice(pool)) for c in letters}
    for _ in range(5):
        w = "".join(rng.choice(letters) for _ in range(rng.randint(0, 7)))
        fw = "".join(f[c] for c in w)
        assert run_word(p, fw) == "".join(f.get(c, c) for c in run_word(p, w))
