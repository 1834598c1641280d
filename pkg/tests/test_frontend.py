import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycheck import fo
from polycheck import hl_ast as A
from polycheck.errors import ParseError, TypeCheckError
from polycheck.parser import parse_program
from polycheck.pipeline import read_program_text
from polycheck.pretty import show_program
from polycheck.specdsl import parse_spec
from polycheck.typecheck import typecheck_program

from conftest import CORPUS, program

REJECTED = {
    "eq_indices": "CrossListComparison",
    "eq_boolean": "BooleanArgument",
    "eq_shadowing": "Shadowing",
    "pcp": "NestedWordEquality",
}


def rejected(name):
    from importlib import resources

    return (resources.files("polycheck") / "corpus" / "rejected" / f"{name}.pr").read_text()


def check(text):
    return typecheck_program(parse_program(text))


# ---------------------------------------------------------------- parsing


def test_subwords_program_shape():
    p = program("subwords_ab")
    assert [f.name for f in p.functions] == ["getBetween", "containsAB", "subwordsWithAB", "main"]
    assert p.main == "main"


def test_empty_input_is_a_syntax_error():
    with pytest.raises(ParseError, match="expected function definition"):
        parse_program("")


def test_as_to_bs_shape():
    p = program("as_to_bs")
    assert len(p.functions) == 1
    body = p.functions[0].body
    assert isinstance(body, A.For) and not body.backward
    assert isinstance(body.body, A.If)


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_program("def main(w : [Char]) : [Char] :=\n    yield (\n")
    assert e.value.span is not None and e.value.span.line == 2


@pytest.mark.parametrize("text", [
    "def main(w : [Char]) : [Char] :=\n    while true do yield 'a' done\n",
    "def main(w : [Char]) : [Char] :=\n    let mut __b0 := False in\n    yield 'a'\n",
])
def test_rejected_surface_constructs(text):
    with pytest.raises((ParseError, TypeCheckError)):
        check(text)


def test_surface_ast_has_no_generators():
    for name in CORPUS:
        assert not A.contains_generators(program(name))


# ---------------------------------------------------------------- typing


def test_signatures_of_subwords_functions():
    sigs = typecheck_program(program("subwords_ab")).signatures
    assert str(sigs["getBetween"]) == "([Char], 2) -> [Char]"
    assert str(sigs["containsAB"]) == "([Char], 0) -> Bool"
    assert str(sigs["subwordsWithAB"]) == "([Char], 0) -> [[Char]]"


@pytest.mark.parametrize("name,category", sorted(REJECTED.items()))
def test_equality_forging_programs_rejected(name, category):
    with pytest.raises(TypeCheckError) as e:
        check(rejected(name))
    assert e.value.category == category


def test_cross_list_error_points_at_comparison():
    with pytest.raises(TypeCheckError) as e:
        check(rejected("eq_indices"))
    assert e.value.span.line == 5


HEADER = "def main(w : [Char]) : [Char] :=\n"


@pytest.mark.parametrize("body,category", [
    ("    let mut b := False in\n    b := False\n    yield 'a'\n", "BooleanReset"),
    ("    let mut b := False in\n    let mut b := False in\n    yield 'a'\n", "BooleanReset"),
    ("    let u := w in\n    u := w\n    yield 'a'\n", "MutationViolation"),
    ("    yield f(w)\n", "WhileOrRecursion"),
    ("    for (i, c) in enumerate(w) do\n        for (i, d) in enumerate(w) do\n"
     "            yield c\n        done\n    done\n", "Shadowing"),
    ("    for (i, c) in enumerate(w) do\n        if c === w then\n            yield c\n"
     "        endif\n    done\n", "NestedWordEquality"),
])
def test_rule_diagnostics(body, category):
    with pytest.raises(TypeCheckError) as e:
        check(HEADER + body)
    assert e.value.category == category


def test_recursion_is_rejected():
    text = "def f(w : [Char]) : [Char] :=\n    yield f(w)\n\ndef main(w : [Char]) : [Char] :=\n    yield f(w)\n"
    with pytest.raises(TypeCheckError) as e:
        check(text)
    assert e.value.category == "WhileOrRecursion"


def test_loops_over_same_variable_share_origin():
    text = HEADER + ("    for (i, c) in enumerate(w) do\n        for (j, d) in reversed(enumerate(w)) do\n"
                     "            if i < j then\n                yield d\n            endif\n        done\n    done\n")
    check(text)


@pytest.mark.parametrize("name", CORPUS)
def test_typecheck_idempotent(name):
    tp = typecheck_program(program(name))
    assert typecheck_program(tp) == tp


# ---------------------------------------------------------------- spec language


def test_contains_factor():
    f = parse_spec('contains_factor("ab")')
    assert fo.free_vars(f) == frozenset()
    assert fo.eval_formula(f, "cab") and not fo.eval_formula(f, "ba")
    assert not fo.eval_formula(f, "a b")


def test_true_spec():
    f = parse_spec("true")
    assert f is fo.TRUE and fo.qrank(f) == 0


def test_ends_with_and_starts_with():
    e, s = parse_spec('ends_with("a")'), parse_spec('starts_with("a")')
    assert fo.eval_formula(e, "ba") and not fo.eval_formula(e, "ab") and not fo.eval_formula(e, "")
    assert fo.eval_formula(s, "ab") and not fo.eval_formula(s, "ba")


def test_spec_sugar_matches_regular_languages():
    f = parse_spec('contains_factor("ab")')
    for w in fo.words_over("abc", 5):
        assert fo.eval_formula(f, w) == ("ab" in w)


def test_spec_quantifiers_and_atoms():
    f = parse_spec("forall x. exists y. x < y or label(x) == 'a'")
    assert fo.qrank(f) == 2
    assert fo.eval_formula(f, "ba") and not fo.eval_formula(f, "ab")


@pytest.mark.parametrize("text", ["forall x. ", "label(x) == 'a'", "exists x. x < y", "contains_factor(ab)"])
def test_spec_errors(text):
    with pytest.raises(ParseError):
        parse_spec(text)


# ---------------------------------------------------------------- pretty printing


@pytest.mark.parametrize("name", CORPUS)
def test_pretty_round_trip_on_corpus(name):
    p = program(name)
    assert parse_program(show_program(p)) == p


def test_corpus_files_are_readable():
    name, text = read_program_text("identity")
    assert name == "identity" and "def main" in text


CHARS = st.sampled_from(["a", "b", " ", "#", "'", "\\", "\n"])


def _stmts(pos, bools, depth):
    """Statements over the word `w` with position variables `pos` in scope."""
    leaves = [st.builds(A.Yield, st.builds(A.Const, st.builds(A.CChar, CHARS)))]
    if pos:
        leaves.append(st.builds(A.Yield, st.builds(A.Var, st.sampled_from([f"c{p[1:]}" for p in pos]))))
    if bools:
        leaves.append(st.builds(A.SetTrue, st.sampled_from(bools)))
    leaf = st.one_of(leaves)
    if depth == 0:
        return leaf
    conds = [st.builds(A.BConst, st.booleans())]
    if bools:
        conds.append(st.builds(A.BVar, st.sampled_from(bools)))
    if len(pos) >= 1:
        conds.append(st.builds(A.PosCmp, st.sampled_from(A.POS_OPS), st.sampled_from(pos), st.sampled_from(pos)))
        conds.append(st.builds(A.LitEq, st.builds(A.Var, st.just(f"c{pos[-1][1:]}")),
                               st.builds(A.Const, st.builds(A.CChar, CHARS))))
    cond = st.one_of(conds)
    cond = st.one_of(cond, st.builds(A.BNot, cond), st.builds(A.BBin, st.sampled_from(A.BOOL_OPS), cond, cond))
    i = f"i{len(pos)}"
    inner = _stmts(pos, bools, depth - 1)
    loop = st.builds(A.For, st.just(i), st.just(f"c{len(pos)}"), st.just(A.Var("w")),
                     _stmts(pos + [i], bools, depth - 1), st.booleans())
    branch = st.builds(A.If, cond, inner, inner)
    b = f"b{len(bools)}"
    let = st.builds(A.LetBool, st.just(b), _stmts(pos, bools + [b], depth - 1))
    block = st.lists(st.one_of(leaf, loop, branch, let), min_size=2, max_size=3).map(lambda xs: A.seq(*xs))
    return st.one_of(leaf, loop, branch, let, block)


PROGRAMS = _stmts([], [], 3).map(
    lambda body: A.Program((A.Function("main", (A.Param("w", A.TOut(1)),), A.TOut(1), body),), "main"))


@settings(max_examples=150, deadline=None)
@given(PROGRAMS)
def test_pretty_round_trip_generated(p):
    assert parse_program(show_program(p)) == p
