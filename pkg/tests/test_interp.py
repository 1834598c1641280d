import itertools

import pytest

from polycheck import BLANK, fo
from polycheck.interp import (
    EVAL_MODES, TOP, Interpretation, ProgramFormula, _uniquify, compose_formulas,
    eval_interpretation, ib, identity_interpretation, iterate_formula, ob,
    parse_interpretation, set_true, show_interpretation, stmt_program_formula,
)
from polycheck.simple import CBool, CLabel, SFor, SIf, SPrintChar, SSeq, SSetTrue, SSkip, _exec, eval_simple, \
    parse_simple

from conftest import CORPUS, SMALL, alphabet, compiled, word_corpus

# ---------------------------------------------------------------- evaluation


def as_to_bs_interpretation():
    x1, y1 = "x1", "y1"
    dom_b = fo.letter(x1, "a")
    order = fo.pos_le(x1, y1)
    return Interpretation(
        frozenset("ab"), ("printB", "copy"), {"printB": 1, "copy": 1}, {"printB": "b", "copy": 1},
        {"printB": dom_b, "copy": fo.neg(dom_b)},
        {(s, t): order for s in ("printB", "copy") for t in ("printB", "copy")},
    )


def test_hand_written_as_to_bs():
    I = as_to_bs_interpretation()
    assert eval_interpretation(I, "abc") == "bbc"
    for w in word_corpus("abc", 4):
        assert eval_interpretation(I, w) == w.replace("a", "b")


def test_no_tags_gives_empty_output():
    I = Interpretation(frozenset(), (), {}, {}, {}, {})
    assert eval_interpretation(I, "abc") == ""


def test_identity_interpretation():
    assert eval_interpretation(identity_interpretation(), "xyz") == "xyz"


def test_non_total_order_gives_empty_word():
    I = identity_interpretation()
    I = Interpretation(I.letters, I.tags, I.arity, I.out, I.dom, {("copy", "copy"): fo.TRUE})
    assert eval_interpretation(I, "xy") == ""
    assert eval_interpretation(I, "x") == "x"


def test_brute_force_semantics():
    # an arity-2 interpretation: all pairs (i, j) with i < j, ordered lexicographically, copying j
    x1, x2, y1, y2 = "x1", "x2", "y1", "y2"
    lex = fo.disj(fo.pos_lt(x1, y1), fo.conj(fo.pos_eq(x1, y1), fo.pos_le(x2, y2)))
    I = Interpretation(frozenset(), ("p",), {"p": 2}, {"p": 1}, {"p": fo.pos_lt(x1, x2)}, {("p", "p"): lex})
    for w in word_corpus("abc", 4):
        expect = "".join(w[j] for i in range(len(w)) for j in range(len(w)) if i < j)
        assert eval_interpretation(I, w) == expect


# ---------------------------------------------------------------- program formulas


def test_set_true_and_print():
    pf = stmt_program_formula(SSetTrue("b"))
    assert pf.phi is fo.bvar(ob("b")) and pf.bout == {"b"}
    for s in (SSkip(), SPrintChar("a")):
        pf = stmt_program_formula(s)
        assert pf.phi is fo.TRUE and not pf.bin and not pf.bout


def outputs(pf, w, env):
    """Output valuations of pf.bout satisfying pf.phi."""
    outs = sorted(pf.bout)
    res = []
    for vals in itertools.product((False, True), repeat=len(outs)):
        e = dict(env)
        e.update({ob(b): v for b, v in zip(outs, vals)})
        if fo.eval_formula(pf.phi, w, e):
            res.append(dict(zip(outs, vals)))
    return res


def test_if_formula_table():
    s = SIf(CLabel("i", "a"), SSetTrue("b"), SSkip())
    pf = stmt_program_formula(s)
    assert pf.bin == {"b"} and pf.bout == {"b"}
    for w in ["a", "b", "ab", "ba"]:
        for i in range(len(w)):
            for bin_ in (False, True):
                outs = outputs(pf, w, {"i": i, ib("b"): bin_})
                assert outs == [{"b": bin_ or w[i] == "a"}]


def test_compose_set_then_branch():
    pf = compose_formulas(set_true("b"), stmt_program_formula(SIf(CBool("b"), SPrintChar("x"), SSkip())))
    assert pf.bout == {"b"}
    for bin_ in (False, True):
        assert outputs(pf, "", {ib("b"): bin_}) == [{"b": True}]


def test_compose_with_unit():
    pf = stmt_program_formula(SIf(CLabel("i", "a"), SSetTrue("b"), SSkip()))
    for q in (compose_formulas(pf, TOP), compose_formulas(TOP, pf)):
        for w in ["a", "b", "ab"]:
            for i in range(len(w)):
                for bin_ in (False, True):
                    env = {"i": i, ib("b"): bin_}
                    assert outputs(q, w, env) == outputs(pf, w, env)


def test_compose_disjoint_adds_no_quantifier():
    p1 = stmt_program_formula(SIf(CLabel("i", "a"), SSetTrue("b"), SSkip()))
    p2 = stmt_program_formula(SIf(CLabel("i", "c"), SSetTrue("c"), SSkip()))
    q = compose_formulas(p1, p2)
    assert fo.qrank(q.phi) == max(fo.qrank(p1.phi), fo.qrank(p2.phi))
    assert q.bout == {"b", "c"}


def dumb_iteration(body: ProgramFormula, var: str, n: int, backward: bool) -> ProgramFormula:
    """Φ[p ↦ 0]; Φ[p ↦ 1]; ... with the positions as fresh free variables."""
    order = range(n - 1, -1, -1) if backward else range(n)
    pf = TOP
    for k in order:
        inst = ProgramFormula(fo.substitute(body.phi, {var: f"P{k}"}), body.bin, body.bout,
                              (body.pos - {var}) | {f"P{k}"})
        pf = compose_formulas(pf, inst)
    return pf


@pytest.mark.parametrize("backward", [False, True])
@pytest.mark.parametrize("body", [
    SIf(CLabel("i", "a"), SSetTrue("seen_a"), SSkip()),
    SSeq((SIf(CLabel("i", "b"), SIf(CBool("seen_a"), SSetTrue("ok"), SSkip()), SSkip()),
          SIf(CLabel("i", "a"), SSetTrue("seen_a"), SSkip()))),
])
def test_iteration_equals_unrolled_composition(backward, body):
    bf = stmt_program_formula(body)
    bf = ProgramFormula(bf.phi, bf.bin | bf.bout, bf.bout, bf.pos)
    star = iterate_formula(bf, "i", backward)
    bs = sorted(bf.bout)
    for w in word_corpus("abc", 4):
        dumb = dumb_iteration(bf, "i", len(w), backward)
        env0 = {f"P{k}": k for k in range(len(w))}
        for vals in itertools.product((False, True), repeat=len(bs)):
            start = dict(zip(bs, vals))
            inp = {ib(b): v for b, v in start.items()}
            # variables outside bout keep their input value
            full = lambda outs: [{**start, **o} for o in outs]
            assert full(outputs(star, w, inp)) == full(outputs(dumb, w, {**inp, **env0}))


def test_seen_a_loop_on_ba():
    sp = parse_simple("let seen_a := false in\nfor i in input do\n    if label(i) == 'a' then\n"
                      "        seen_a := true\n    endif\ndone\n")
    pf = stmt_program_formula(sp.body)
    assert outputs(pf, "ba", {ib("seen_a"): False}) == [{"seen_a": True}]
    assert outputs(pf, "bb", {ib("seen_a"): False}) == [{"seen_a": False}]


def statements(s, loops=()):
    yield s, loops
    if isinstance(s, SSeq):
        for x in s.stmts:
            yield from statements(x, loops)
    elif isinstance(s, SIf):
        yield from statements(s.then, loops)
        yield from statements(s.els, loops)
    elif isinstance(s, SFor):
        yield from statements(s.body, loops + (s.var,))


@pytest.mark.parametrize("name", ["get_first_word", "get_last_word", "compress_as", "subwords_ab", "prefixes"])
def test_program_formulas_functional_and_correct(name):
    sp = _uniquify(compiled(name).simple)
    letters = alphabet(name, "a")[:3]
    checked = 0
    for s, loops in statements(sp.body):
        pf = stmt_program_formula(s)
        pf.check_vars()
        ins = sorted(pf.bin | pf.bout)
        if len(ins) + len(pf.bout) > 6 or len(loops) > 2:
            continue
        checked += 1
        for w in word_corpus(letters, 3):
            for pos in itertools.product(range(len(w)), repeat=len(loops)):
                env = dict(zip(loops, pos))
                for vals in itertools.product((False, True), repeat=len(ins)):
                    start = dict(zip(ins, vals))
                    got = outputs(pf, w, {**env, **{ib(b): start[b] for b in pf.bin}})
                    state = dict(start)
                    _exec(s, w, dict(env), state, [])
                    assert got == [{b: state[b] for b in sorted(pf.bout)}]
    assert checked > 0


# ---------------------------------------------------------------- compiled interpretations


def test_compiled_as_to_bs():
    I = compiled("as_to_bs").interp
    assert len(I.tags) == 2
    assert all(I.arity[t] == 1 for t in I.tags)
    assert sorted(map(str, I.out.values())) == ["1", "b"]
    assert all(fo.qrank(I.dom[t]) == 0 for t in I.tags)
    # ties between the two prints on one position favour the first branch
    t0, t1 = I.tags
    assert fo.eval_formula(I.order[(t0, t1)], "a", {"x1": 0, "y1": 0})
    assert not fo.eval_formula(I.order[(t1, t0)], "a", {"x1": 0, "y1": 0})


def test_compiled_identity():
    I = compiled("identity").interp
    (t,) = I.tags
    assert I.arity[t] == 1 and I.dom[t] is fo.TRUE and I.qrank() == 0
    o = I.order[(t, t)]
    for a in range(3):
        for b in range(3):
            assert fo.eval_formula(o, "abc", {"x1": a, "y1": b}) == (a <= b)


@pytest.mark.parametrize("name", ["identity", "reverse", "prefixes"])
def test_zero_boolean_programs_are_quantifier_free(name):
    assert compiled(name).interp.qrank() == 0


@pytest.mark.parametrize("name", SMALL)
def test_interpretation_matches_simple_program(name):
    c = compiled(name)
    for w in word_corpus(alphabet(name, "a"), 4, n_random=40):
        assert eval_interpretation(c.interp, w) == eval_simple(c.simple, w)


@pytest.mark.parametrize("name", ["get_first_word", "as_to_bs", "compress_as", "reverse_add_hash"])
def test_evaluation_modes_agree(name):
    I = compiled(name).interp
    for w in word_corpus(alphabet(name, "a"), 3):
        outs = {eval_interpretation(I, w, mode) for mode in EVAL_MODES}
        assert len(outs) == 1, (w, outs)


def test_get_first_word_exhaustive():
    c = compiled("get_first_word")
    for w in word_corpus("ab ", 5):
        assert eval_interpretation(c.interp, w) == eval_simple(c.simple, w)


@pytest.mark.parametrize("name", CORPUS)
def test_formulas_use_program_constants_only(name):
    I = compiled(name).interp
    used = set()
    for f in I.formulas():
        used |= fo.letters(f)
    assert used <= set(I.letters)
    for t in I.tags:
        assert fo.free_vars(I.dom[t]) <= {f"x{k}" for k in range(1, I.arity[t] + 1)}
        o = I.out[t]
        assert (o in I.letters) if isinstance(o, str) else 1 <= o <= I.arity[t]


@pytest.mark.parametrize("name", SMALL)
def test_text_round_trip(name):
    I = compiled(name).interp
    J = parse_interpretation(show_interpretation(I))
    assert J.tags == I.tags and J.arity == I.arity and J.out == I.out and J.letters == I.letters
    for w in word_corpus(alphabet(name, "a"), 3):
        assert eval_interpretation(J, w, "relational") == eval_interpretation(I, w)


def test_blank_never_a_constant():
    for name in CORPUS:
        assert BLANK not in compiled(name).interp.letters
