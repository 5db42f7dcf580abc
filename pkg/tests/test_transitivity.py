import random

import pytest
from hypothesis import given, settings, strategies as st

from padic_automata.automaton import (ConstantAutomaton, FiniteAutomaton, adding_machine,
                                      disjunctive_sequence, run)
from padic_automata.errors import GuardError
from padic_automata.expr import Const, Identity, Poly, eval_mod, expc, poly, x
from padic_automata.grammar import parse_expr
from padic_automata.transitivity import (check_absolute_transitive, check_complete_transitive,
                                         complete_transitivity_witness, ergodic_form,
                                         is_n_word_transitive, poly_word_transitive_z2,
                                         recheck_witness, sufficient_condition_certificate,
                                         word_transitive_up_to)
from padic_automata.words import Word, all_words, residue_word

X = x()
QUAD = poly([1, 3, 2])


def W(s, p=2):
    return Word.parse(s, p)


def orbit_of_zero(f, n, p=2):
    # oracle: plain scalar walk, no vectorization
    seen, v = [], 0
    while v not in seen:
        seen.append(v)
        v = eval_mod(f, v, n) if n else 0
    return seen


def single_cycle(f, n, p=2):
    orbit = orbit_of_zero(f, n, p)
    return len(orbit) == p ** n and eval_mod(f, orbit[-1], n) == 0


def test_level_examples():
    r = is_n_word_transitive(X + 1, 4)
    assert r.status == "Transitive" and r.orbit_length == 16
    assert orbit_of_zero(X + 1, 4) == list(range(16))
    assert is_n_word_transitive(QUAD, 3).status == "Transitive"
    assert orbit_of_zero(QUAD, 3) == [0, 1, 6, 3, 4, 5, 2, 7]
    for n in (1, 3, 6):
        assert is_n_word_transitive(Const(5), n).status == "NotTransitive"


def test_up_to_examples():
    rep = word_transitive_up_to(X + 1, 16)
    assert rep.verdict == "WordTransitiveUpTo(16)"
    rep = word_transitive_up_to(ConstantAutomaton(disjunctive_sequence()), 3)
    assert rep.verdict == "NotWordTransitive(1)"
    assert [lv.status for lv in rep.levels] == ["NotTransitive", "Skipped", "Skipped"]
    rep = word_transitive_up_to(QUAD, 12)
    assert rep.verdict == "WordTransitiveUpTo(12)"
    assert all(single_cycle(QUAD, n) for n in range(1, 11))


def test_automaton_input():
    assert word_transitive_up_to(adding_machine(), 10).verdict == "WordTransitiveUpTo(10)"


def test_level_guard():
    with pytest.raises(GuardError):
        is_n_word_transitive(X + 1, 20, guard=1000)


def test_poly_criterion_examples():
    assert poly_word_transitive_z2((1, 3, 2)) == "WordTransitiveAllN"
    assert poly_word_transitive_z2((0, 1)) == "NotWordTransitive"


def test_poly_criterion_cross_check():
    rng = random.Random(11)
    for _ in range(50):
        cs = tuple(rng.randint(-20, 20) for _ in range(rng.randint(1, 6)))
        verdict = poly_word_transitive_z2(cs)
        levels = word_transitive_up_to(Poly(cs), 14).verdict
        assert (verdict == "WordTransitiveAllN") == (levels == "WordTransitiveUpTo(14)")
    # make sure both outcomes occur in the sample family
    assert poly_word_transitive_z2((1, 1)) == "WordTransitiveAllN"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-30, 30), min_size=1, max_size=5), st.integers(1, 8))
def test_cross_check_property(cs, n):
    allN = poly_word_transitive_z2(cs) == "WordTransitiveAllN"
    upto = word_transitive_up_to(Poly(tuple(cs)), n).verdict == f"WordTransitiveUpTo({n})"
    if n >= 3:
        assert allN == upto
    else:
        # below word length 3 only one direction holds: 1 - x cycles mod 2 but not mod 8
        assert upto or not allN


def test_cross_check_needs_three_letters():
    assert word_transitive_up_to(Poly((1, -1)), 1).verdict == "WordTransitiveUpTo(1)"
    assert poly_word_transitive_z2((1, -1)) == "NotWordTransitive"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-30, 30), min_size=1, max_size=5))
def test_monotone_failure(cs):
    f = Poly(tuple(cs))
    statuses = [is_n_word_transitive(f, n).status for n in range(1, 9)]
    for a, b in zip(statuses, statuses[1:]):
        if a == "NotTransitive":
            assert b == "NotTransitive"
    for n, s in enumerate(statuses, 1):
        assert (s == "Transitive") == single_cycle(f, n)


@pytest.mark.parametrize("g,expect", [
    (Const(0), (1, 1)),
    (poly([0, 0, 1]), (3, 5)),
])
def test_ergodic_form_examples(g, expect):
    f = ergodic_form(g)
    for v in range(64):
        assert eval_mod(f, v, 10) == Poly(expect).exact(v) % 2 ** 10
    assert is_n_word_transitive(f, 10).status == "Transitive"


def test_ergodic_form_expc():
    f = ergodic_form(expc(3))
    for v in range(64):
        assert eval_mod(f, v, 12) == (1 + v + 4 * 3 ** v) % 2 ** 12
    assert word_transitive_up_to(f, 12).verdict == "WordTransitiveUpTo(12)"


def test_ergodic_form_requires_p2():
    with pytest.raises(ValueError):
        ergodic_form(x(3))


def test_witness_examples():
    r = complete_transitivity_witness(X + 1, W("00"), W("10"), lmax=16)
    assert not r.found and r.exhausted_up_to == 16
    r = complete_transitivity_witness(QUAD, W("00"), W("10"), lmax=16)
    assert r.found and recheck_witness(QUAD, W("00"), W("10"), r.prefix)
    for w in all_words(3, 2):
        r = complete_transitivity_witness(Identity(), w, w)
        assert r.found and r.prefix == Word.empty(2)


def test_witness_is_first_in_search_order():
    r = complete_transitivity_witness(QUAD, W("01"), W("11"), lmax=10)
    # oracle: brute force in (length, value) order
    for ell in range(0, 11):
        hits = [y for y in range(2 ** ell)
                if recheck_witness(QUAD, W("01"), W("11"), residue_word(y, ell, 2))]
        if hits:
            assert r.prefix == residue_word(hits[0], ell, 2)
            break


def test_adding_machine_refuted_exactly():
    rep = check_complete_transitive(adding_machine(), 2)
    assert rep.verdict == "Refuted" and rep.mode == "exact"
    assert [str(w) for w in rep.refuted] == ["00", "10"]
    # the level-n family is {x, x+1}: the reachable outputs from w are w and w+1
    for n in (1, 2, 3, 4):
        for w in all_words(n, 2):
            outs = set()
            for ell in range(0, 6):
                for y in all_words(ell, 2):
                    out = run(adding_machine(), Word(2, y.letters + w.letters))
                    outs.add(Word(2, out.letters[ell:]).value)
            assert outs == {w.value, (w.value + 1) % 2 ** n}


def test_quadratic_all_pairs():
    rep = check_complete_transitive(QUAD, 2, lmax=16)
    assert rep.verdict == "WitnessedAllPairs" and len(rep.results) == 16
    assert all(recheck_witness(QUAD, r.w, r.w_prime, r.prefix) for r in rep.results)


def test_jobs_do_not_change_results():
    a = check_complete_transitive(QUAD, 2, lmax=12, jobs=1).to_json()
    b = check_complete_transitive(QUAD, 2, lmax=12, jobs=4).to_json()
    assert a == b


@st.composite
def machines(draw):
    n = draw(st.integers(1, 5))
    S = [[draw(st.integers(0, n - 1)) for _ in range(n)] for _ in range(2)]
    O = [[draw(st.integers(0, 1)) for _ in range(n)] for _ in range(2)]
    return FiniteAutomaton(2, S, O, draw(st.integers(0, n - 1)))


@settings(max_examples=40, deadline=None)
@given(machines())
def test_finite_machines_never_completely_transitive(m):
    # 2^3 targets per source word exceed the at most 5 state maps
    rep = check_complete_transitive(m, 3)
    assert rep.mode == "exact" and rep.verdict == "Refuted"


def test_absolute_examples():
    f = poly([0, 0, 1, 1])
    rep = check_absolute_transitive(f, 1, 1, lmax=16)
    assert rep.verdict == "Witnessed" and len(rep.results) == 8
    assert all(recheck_witness(f, r.w, r.w_prime, r.prefix, r.x) for r in rep.results)
    rep = check_absolute_transitive(Const(7), 2, 1, lmax=6)
    assert rep.verdict == "Inconclusive"
    # the output block at offset xlen + len(y) is a window of the bits of 7
    windows = {(7 >> (1 + ell)) % 4 for ell in range(7)}
    assert windows == {0, 1, 3}
    assert {r.w_prime.value for r in rep.results if r.found} == windows


def test_absolute_finite_machine_exact():
    rep = check_absolute_transitive(adding_machine(), 2, 1)
    assert rep.mode == "exact" and rep.verdict == "Refuted"


def test_pair_guard():
    with pytest.raises(GuardError):
        check_complete_transitive(QUAD, 9, max_pairs=1 << 16)


def test_certificate_examples():
    c = sufficient_condition_certificate(QUAD)
    assert c.cls == "PolyDegreeGe2" and c.v == 0 and c.second["value"] == 4 and c.mode == "exact"
    c = sufficient_condition_certificate(3 * X + expc(3))
    assert c.cls == "CxPlusCx"
    # ord_2 log 3 = ord_2(3^2 - 1) - 1 = 2, so the second derivative has valuation 4
    assert c.second["valuation"] == 4
    assert sufficient_condition_certificate(X).cls == "Unsupported"
    assert sufficient_condition_certificate(1 + X + (X ** 2 | 5)).cls == "PolyPlusOrC"
    assert sufficient_condition_certificate(parse_expr("x+(x^2|-131065)")).cls == "Unsupported"


def test_certificate_sign_variants():
    # -x^2 - 1 takes values in -N0 on N0
    c = sufficient_condition_certificate(poly([-1, 0, -1]))
    assert c.cls == "PolyDegreeGe2" and c.sign_variant == "f(N0) in -N0"


CERTIFIED = [QUAD, 3 * X + expc(3), 1 + X + (X ** 2 | 5), poly([0, 0, 1, 1]), poly([-1, 0, -1])]


@pytest.mark.parametrize("f", CERTIFIED, ids=str)
def test_certificate_soundness_hook(f):
    assert sufficient_condition_certificate(f).ok
    rep = check_complete_transitive(f, 2, lmax=20)
    assert rep.verdict == "WitnessedAllPairs"
    assert all(recheck_witness(f, r.w, r.w_prime, r.prefix) for r in rep.results)


def test_report_json_shapes():
    rep = check_absolute_transitive(poly([0, 0, 1, 1]), 1, 1, lmax=8).to_json()
    assert rep["xlen"] == 1 and all("y" in w and "x" in w for w in rep["witnesses"])
    lv = word_transitive_up_to(QUAD, 3).to_json()
    assert lv["levels"][0] == {"n": 1, "status": "Transitive", "orbit_length": 2, "cycles": 1}
