import itertools
import random

import pytest

from tdlog.automata import (AcceptBuilder, Dfa, EnrichedLetter, Nfa, build_accept_dfa,
                            build_expand_2nfa, build_expand_nfa, build_notaccept_nfa,
                            complement_dfa, correctness_dfa, cut_enrichment, determinize,
                            dump_automaton, is_empty, legality, minimize_dfa, product)
from tdlog.core import BudgetError, FragmentError, parse_program
from tdlog.expansions import (Bodies, alphabet, describe, enumerate_expansions, in_accept_omega,
                              is_correct, parse_omega)

from helpers import fixture_program

EX2U = fixture_program("ex2_unbounded.tdl")
EX2B = fixture_program("ex2_bounded.tdl")
EX3 = fixture_program("ex3.tdl")


def parity_with_junk():
    # states 2, 3 duplicate 0, 1; state 4 is unreachable
    delta = [(1, 2), (0, 3), (3, 0), (2, 1), (4, 4)]
    return Dfa(("a", "b"), delta, 0, frozenset({0, 2}))


def correct_words(prog, max_len):
    b = Bodies(prog)
    alpha = alphabet(b)
    for n in range(max_len + 1):
        for w in itertools.product(alpha, repeat=n):
            if is_correct(b, w):
                yield w


def test_minimize_parity_with_junk():
    d = parity_with_junk()
    m = minimize_dfa(d)
    assert m.size == 2
    for w in itertools.product("ab", repeat=5):
        assert m.accepts(w) == d.accepts(w) == (w.count("a") % 2 == 0)


def test_complement_and_product():
    d = parity_with_junk()
    c = complement_dfa(d)
    assert is_empty(product(d, c, "and"))
    both = product(d, c, "or")
    assert all(both.accepts(w) for w in itertools.product("ab", repeat=3))
    assert is_empty(product(d, d, "diff"))


def test_determinize_lazy_nfa():
    # words over {a,b} whose second-to-last letter is a
    nfa = Nfa({0}, lambda q, c: {0, 1} if q == 0 and c == "a" else ({0} if q == 0 else
                                                                     ({2} if q == 1 else set())),
              lambda q: q == 2, "ab")
    d = minimize_dfa(determinize(nfa, "ab"))
    assert d.size == 4
    for w in itertools.product("ab", repeat=4):
        assert d.accepts(w) == nfa.accepts(w) == (w[-2] == "a")


def test_nfa_budget():
    nfa = Nfa({0}, lambda q, c: {q + 1}, lambda q: False, "a", budget=5)
    with pytest.raises(BudgetError):
        nfa.run("a" * 10)


def test_dump_format_is_stable():
    adj, letters = dump_automaton(minimize_dfa(parity_with_junk()), "parity")
    assert adj.splitlines()[0] == "# automaton parity: 2 states, start 0"
    assert adj.splitlines()[1] == "accepting 0"
    assert len(letters.splitlines()) == 2
    assert dump_automaton(minimize_dfa(parity_with_junk()), "parity") == (adj, letters)


def test_correctness_dfa_matches_checker():
    b = Bodies(EX3)
    d = correctness_dfa(b)
    rng = random.Random(4)
    alpha = alphabet(b)
    for _ in range(300):
        w = tuple(rng.choice(alpha) for _ in range(rng.randint(0, 6)))
        assert d.accepts(w) == is_correct(b, w)


def test_expand_2nfa_accepts_descriptions():
    for prog in (EX2U, EX3):
        tw = build_expand_2nfa(prog)
        one = build_expand_nfa(prog)
        for e in enumerate_expansions(prog, max_len=5):
            w = describe(prog, e.word)
            assert tw.accepts(w), e.word
            assert one.accepts(w), e.word


def test_expand_rejects_unanchored_word():
    # a vertical letter alone never ends in an initialization body
    tw = build_expand_2nfa(EX3)
    assert not tw.accepts(parse_omega("{b1}"))
    assert not build_expand_nfa(EX3).accepts(parse_omega("{b1}"))


def test_one_way_conversion_agrees_with_two_way():
    tw = build_expand_2nfa(EX2B)
    one = build_expand_nfa(EX2B)
    for w in correct_words(EX2B, 3):
        assert tw.accepts(w) == one.accepts(w), w


def test_notaccept_ex3():
    na = build_notaccept_nfa(EX3)
    for n, k in itertools.product(range(4), repeat=2):
        w = describe(EX3, (1,) + (2,) * n + (3,) * k)
        assert na.accepts(w) == (n >= k)


def test_notaccept_accepts_incorrect_words():
    na = build_notaccept_nfa(EX3)
    assert na.accepts(parse_omega("{b1} {b2}"))


@pytest.mark.parametrize("name", ["ex2_unbounded.tdl", "ex2_bounded.tdl"])
def test_accept_dfa_matches_direct_evaluation(name):
    prog = fixture_program(name)
    d = build_accept_dfa(prog)
    na = build_notaccept_nfa(prog)
    for w in correct_words(prog, 3):
        truth = in_accept_omega(prog, w)
        assert d.accepts(w) == truth, w
        assert na.accepts(w) != truth, w


def test_accept_dfa_sizes_are_minimal_and_stable():
    assert build_accept_dfa(EX2U).size == 13
    assert build_accept_dfa(EX2B).size == 16


def test_subset_method_agrees_on_small_program():
    prog = parse_program("#goal G.\nG(X) <- A(X), O G(X).\nG(X) <- B(X).")
    a = build_accept_dfa(prog)
    b = build_accept_dfa(prog, method="subset")
    assert a.size == b.size
    for w in correct_words(prog, 4):
        assert a.accepts(w) == b.accepts(w)


def test_accept_builder_rejects_incorrect():
    assert not AcceptBuilder(EX3).accepts(parse_omega("{b1} {b2}"))


def test_accept_needs_next_only():
    with pytest.raises(FragmentError):
        build_accept_dfa(parse_program("#goal G.\nG(X) <- F A(X).\nG(X) <- O G(X)."))


def test_cut_enrichment_is_legal():
    rng = random.Random(0)
    words = list(correct_words(EX2U, 3))
    for w in rng.sample(words, 40):
        assert legality(EX2U, cut_enrichment(EX2U, w))


def test_dropping_a_derived_atom_is_illegal():
    w = describe(EX3, (1, 2, 3, 3))
    e = cut_enrichment(EX3, w)
    atoms = [(i, x) for i, l in enumerate(e) for x in l.added]
    assert atoms
    for i, x in atoms[:5]:
        e2 = list(e)
        e2[i] = EnrichedLetter(e[i].letter, e[i].added - {x})
        assert not legality(EX3, tuple(e2))


def test_extra_atoms_are_legal_only_inside_the_cut():
    w = describe(EX3, (4,))
    e = cut_enrichment(EX3, w)
    body = next(iter(w[0].bodies))
    assert (body, "G", "X", 0) in e[0].added
    # a larger model is still a model; an atom beyond the cut window is not
    inside = EnrichedLetter(w[0], e[0].added | {(body, "G", "X", 1)})
    outside = EnrichedLetter(w[0], e[0].added | {(body, "G", "X", 5)})
    assert legality(EX3, (inside,))
    assert not legality(EX3, (outside,))
