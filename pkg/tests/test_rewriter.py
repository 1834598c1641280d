import pytest

from polycheck import hl_ast as A
from polycheck.interpreter import AddrValue, addr_before, run_word
from polycheck.parser import parse_program
from polycheck.rewriter import PASSES, run_passes, simple_to_hl
from polycheck.simple import eval_simple, show_simple
from polycheck.typecheck import typecheck_program

from conftest import CORPUS, SMALL, alphabet, program, word_corpus


def nodes(p, cls):
    return [n for n in A.iter_nodes(p) if isinstance(n, cls)]


def assert_equiv(p, q, words):
    for w in words:
        assert run_word(q, w) == run_word(p, w), w


# what each pass must have removed from its output
def no_list_literal_equality(p):
    for e in nodes(p, A.LitEq):
        for side in (e.left, e.right):
            assert not (isinstance(side, A.Const) and isinstance(side.value, A.CList))


def only_char_constants(p):
    assert all(isinstance(c.value, A.CChar) for c in nodes(p, A.Const))


def single_function(p):
    assert len(p.functions) == 1 and not nodes(p, A.Call) and not nodes(p, A.BCall)


def no_bool_generators(p):
    assert not nodes(p, A.BoolGen)


def no_let_output(p):
    assert not nodes(p, A.LetOut)


def no_returns(p):
    assert not nodes(p, A.Return)


def loops_over_variables(p):
    assert all(isinstance(f.iter, A.Var) for f in nodes(p, A.For))
    assert not nodes(p, A.ListGen)


def hoisted(p):
    def walk(s, head):
        if isinstance(s, A.LetBool):
            assert head, f"boolean {s.name} not hoisted"
            walk(s.body, True)
        elif isinstance(s, A.For):
            walk(s.body, True)
        elif isinstance(s, A.If):
            walk(s.then, False)
            walk(s.els, False)
        elif isinstance(s, A.Seq):
            for x in s.stmts:
                walk(x, False)

    for f in p.functions:
        walk(f.body, True)


POSTCONDITIONS = {
    "A": [no_list_literal_equality],
    "B": [no_list_literal_equality, only_char_constants],
    "C": [only_char_constants, single_function],
    "D": [single_function, no_bool_generators],
    "E": [single_function, no_bool_generators, no_let_output],
    "F": [no_bool_generators, no_let_output],
    "G": [no_bool_generators, no_let_output, no_returns, loops_over_variables],
    "H": [no_bool_generators, no_let_output, no_returns, loops_over_variables, hoisted],
}


@pytest.mark.parametrize("name", SMALL)
def test_each_pass_preserves_semantics_and_typing(name):
    res = run_passes(program(name))
    words = word_corpus(alphabet(name, "a"), 4, n_random=30)
    for pid in PASSES:
        stage = res.stages[pid]
        typecheck_program(stage, relaxed=True)
        for check in POSTCONDITIONS[pid]:
            check(stage)
        assert_equiv(program(name), stage, words)


@pytest.mark.parametrize("name", CORPUS)
def test_rewrite_idempotent_through_simple_embedding(name):
    sp = run_passes(program(name)).simple
    again = run_passes(typecheck_program(simple_to_hl(sp), relaxed=True)).simple
    assert again == sp


def test_pass_reports():
    res = run_passes(program("subwords_ab"))
    assert [r.pass_id for r in res.reports] == list(PASSES)
    assert all(r.size_in > 0 and r.size_out > 0 for r in res.reports)
    assert any(r.fresh_names for r in res.reports)
    assert all(n.startswith("__") for r in res.reports for n in r.fresh_names)


HEAD = "def main(w : [Char]) : [Char] :=\n"


def test_literal_equality_becomes_checker():
    p = parse_program(HEAD + "    if w === \"ab\" then\n        yield 'y'\n    else\n        yield 'n'\n    endif\n")
    res = run_passes(p)
    after = res.stages["A"]
    assert len(after.functions) == 2
    no_list_literal_equality(after)
    assert_equiv(p, after, word_corpus("ab", 4))
    assert run_word(after, "ab") == "y" and run_word(after, "abb") == "n"


def test_literal_equality_on_list_elements():
    p = parse_program(
        "def f(x : [[Char]]) : [Char] :=\n    for (k, elem) in enumerate(x) do\n"
        "        if elem === \"one\" then\n            yield '1'\n        endif\n    done\n\n"
        "def main(w : [Char]) : [Char] :=\n    yield 'a'\n")
    after = run_passes(p, upto="A").stages["A"]
    no_list_literal_equality(after)
    from polycheck.interpreter import eval_program
    for x in [("one",), ("on", "one", "onee"), (), ("",)]:
        assert eval_program(after, x, "f") == eval_program(p, x, "f")


def test_literal_production_becomes_call():
    p = parse_program("def f(w : [Char]) : [[Char]] :=\n    yield \"ab\"\n    yield w\n\n"
                      + HEAD + "    for (k, s) in enumerate(f(w)) do\n        for (j, c) in enumerate(s) do\n"
                      "            yield c\n        done\n        yield 'c'\n    done\n")
    res = run_passes(p, upto="B")
    only_char_constants(res.stages["B"])
    assert len(res.stages["B"].functions) == 3
    assert run_word(res.stages["B"], "x") == run_word(p, "x") == "abcxc"


def test_nested_constant():
    p = parse_program(HEAD + "    for (k, s) in enumerate([\"a\", \"bc\"]) do\n"
                      "        for (j, c) in enumerate(s) do\n            yield c\n        done\n"
                      "        yield '#'\n    done\n")
    after = run_passes(p, upto="B").stages["B"]
    only_char_constants(after)
    assert run_word(after, "") == run_word(p, "") == "a#bc#"


def test_passes_without_work_are_identity():
    p = program("identity")
    res = run_passes(p)
    for pid in PASSES:
        assert res.stages[pid] == p
    assert show_simple(res.simple) == "for i in input do\n    print label(i)\ndone\n"


def test_nested_calls_and_generators():
    p = parse_program(
        "def f(w : [Char]) : [Char] :=\n    for (i, c) in enumerate(w) do\n        if c === 'a' then\n"
        "            yield c\n        endif\n    done\n\n"
        "def g(w : [Char]) : [Char] :=\n    for (i, c) in reversed(enumerate(w)) do\n        yield c\n    done\n\n"
        "def main(w : [Char]) : [Char] :=\n    return g(f(w))\n")
    res = run_passes(p)
    c = res.stages["C"]
    single_function(c)
    gens = nodes(c, A.ListGen)
    assert len(gens) >= 2
    assert_equiv(p, c, word_corpus("ab", 5))
    assert_equiv(p, res.stages["H"], word_corpus("ab", 5))


def test_two_boolean_generators_get_two_flags():
    text = ("def hasA(w : [Char]) : Bool :=\n    for (i, c) in enumerate(w) do\n        if c === 'a' then\n"
            "            return True\n        endif\n    done\n    return False\n\n"
            "def hasB(w : [Char]) : Bool :=\n    for (i, c) in enumerate(w) do\n        if c === 'b' then\n"
            "            return True\n        endif\n    done\n    return False\n\n"
            "def main(w : [Char]) : [Char] :=\n    if hasA(w) then\n        yield 'A'\n    endif\n"
            "    if hasB(w) then\n        yield 'B'\n    endif\n")
    p = parse_program(text)
    d = run_passes(p, upto="D").stages["D"]
    no_bool_generators(d)
    flags = {n.name for n in nodes(d, A.LetBool)}
    assert len(flags) == 2
    assert_equiv(p, d, word_corpus("abc", 4))


def test_let_output_duplicated():
    p = parse_program(HEAD + "    let s := w in\n    for (i, c) in enumerate(s) do\n        yield c\n    done\n"
                      "    for (i, c) in enumerate(s) do\n        yield c\n    done\n")
    e = run_passes(p, upto="E").stages["E"]
    no_let_output(e)
    assert run_word(e, "ab") == "abab"


def test_early_return_suppresses_later_yields():
    p = parse_program(HEAD + "    for (i, c) in enumerate(w) do\n        if c === '.' then\n            return \"!\"\n"
                      "        endif\n        yield c\n    done\n    yield '$'\n")
    res = run_passes(p)
    no_returns(res.stages["G"])
    for w in word_corpus("a.", 5):
        assert eval_simple(res.simple, w) == run_word(p, w)
    # output yielded before the return is kept
    assert run_word(p, "a.a") == "a!"
    assert run_word(p, "aa") == "aa$"


SKIP_FIRST = """def skipFirst(u : [Char]) : [Char] :=
    let mut b := False in
    for (j, x) in enumerate(u) do
        if b then
            yield x
        endif
        b := True
    done

def main(u : [Char]) : [Char] :=
    for (i, x) in reversed(enumerate(skipFirst(u))) do
        yield x
    done
"""


def test_backward_loop_expansion_shape():
    p = parse_program(SKIP_FIRST)
    g = run_passes(p, upto="G").stages["G"]
    outer = g.functions[0].body
    assert isinstance(outer, A.For) and outer.backward and outer.iter == A.Var("u")
    flag = outer.body
    assert isinstance(flag, A.LetBool)
    inner = flag.body
    assert isinstance(inner, A.For) and not inner.backward and inner.iter == A.Var("u")
    guard, set_flag = inner.body.stmts
    assert isinstance(set_flag, A.SetTrue) and set_flag.name == flag.name
    assert isinstance(guard, A.If) and guard.cond == A.BVar(flag.name)
    eq = guard.then
    assert isinstance(eq, A.If) and eq.cond == A.PosCmp("==", inner.pos, outer.pos)
    assert eq.then == A.Yield(A.Var(inner.elem))
    assert_equiv(p, g, word_corpus("abc", 5))
    assert run_word(g, "abcd") == "dcb"


def test_forward_loop_over_input_unchanged():
    p = program("as_to_bs")
    assert run_passes(p, upto="G").stages["G"] == p


def test_before_relation_on_three_yields():
    # p1, p2 inside one backward loop (id 1), p3 after it
    def p1(j):
        return AddrValue((0, ((1, True, j),)))

    def p2(j):
        return AddrValue((1, ((1, True, j),)))

    p3 = AddrValue((2, ()))
    for j in range(4):
        for k in range(4):
            assert addr_before(p1(j), p2(k)) == (j >= k)
            assert addr_before(p2(j), p2(k)) == (j > k)
        assert addr_before(p1(j), p3) and addr_before(p2(j), p3)


def test_hoisting_sibling_branches():
    p = parse_program(HEAD + "    for (i, c) in enumerate(w) do\n        if c === 'a' then\n"
                      "            let mut x := False in\n            yield c\n        else\n"
                      "            let mut y := False in\n            yield 'z'\n        endif\n    done\n")
    h = run_passes(p).stages["H"]
    hoisted(h)
    assert {n.name for n in nodes(h, A.LetBool)} == {"x", "y"}
    assert_equiv(p, h, word_corpus("ab", 4))
