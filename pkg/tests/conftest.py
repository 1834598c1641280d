import random
from functools import lru_cache

import pytest

from polycheck import BLANK, fo
from polycheck.interpreter import support_constants
from polycheck.pipeline import compile_program, corpus_names, load_program

CORPUS = corpus_names()
# bibtex and litteral_test are large; they run in the acceptance suite only
SMALL = [n for n in CORPUS if n not in ("bibtex", "litteral_test")]


@lru_cache(maxsize=None)
def program(name):
    return load_program(name)


@lru_cache(maxsize=None)
def compiled(name):
    return compile_program(program(name))


def alphabet(name, extra=()):
    return sorted(support_constants(program(name)) | {BLANK} | set(extra))


def word_corpus(letters, maxlen, n_random=0, random_maxlen=12, seed=0):
    """All words up to `maxlen` plus `n_random` random words up to `random_maxlen`."""
    words = list(fo.words_over(letters, maxlen))
    rng = random.Random(seed)
    for _ in range(n_random):
        words.append("".join(rng.choice(letters) for _ in range(rng.randint(0, random_maxlen))))
    return words


@pytest.fixture(params=SMALL)
def small_program(request):
    return request.param


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
