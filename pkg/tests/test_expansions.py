import itertools

import pytest

from tdlog.core import parse_program
from tdlog.expansions import (Bodies, Letter, alphabet, body_query, compose, correctness_violation,
                              db_of_omega, db_of_word, describe, enumerate_expansions,
                              format_omega, height, in_accept, in_accept_omega, is_correct,
                              parse_omega, precedes, word_query)
from tdlog.semantics import db_of_tcq, find_homomorphism, parse_tcq

from helpers import fixture_program

INTRO = fixture_program("intro.tdl")
EX3 = fixture_program("ex3.tdl")
GOLDEN = "{b1} {b1} {b2} {b3,TOP} {b3} {b2,b3,BOT} {b2,b3} {b3} {b1}"


def same_up_to_renaming(q1, q2):
    d1, d2 = db_of_tcq(q1), db_of_tcq(q2)
    return (find_homomorphism(d1, d2, {"X": "X"}) is not None
            and find_homomorphism(d2, d1, {"X": "X"}) is not None
            and len(d1.facts) == len(d2.facts))


def test_compose_intro_bodies():
    q = compose(body_query(INTRO, 1), body_query(INTRO, 3), INTRO.idb)
    assert same_up_to_renaming(q, parse_tcq("Q(X) <- A(X), O R(X,Y), O B(Y)."))


def test_compose_with_single_atom_init_is_substitution():
    q = compose(parse_tcq("Q(X) <- R(X,Y), D(Y)."), parse_tcq("Q(Y) <- B(Y)."), frozenset({"D"}))
    assert [str(a) for a in q.body] == ["R(X,Y)", "B(Y)"]


def test_compose_is_associative():
    b1, b2, b3 = (body_query(EX3, i) for i in (1, 2, 3))
    left = compose(compose(b1, b2, EX3.idb, "l"), b3, EX3.idb, "m")
    right = compose(b1, compose(b2, b3, EX3.idb, "r"), EX3.idb, "s")
    assert same_up_to_renaming(left, right)


def test_compose_arity_mismatch():
    with pytest.raises(ValueError):
        compose(parse_tcq("Q(X) <- D(X)."), parse_tcq("Q(X,Y) <- R(X,Y)."), frozenset({"D"}))


def test_length_one_expansions_are_init_bodies():
    ones = [e.word for e in enumerate_expansions(EX3, max_len=1)]
    assert ones == [(4,)]


def test_ex2_length_two_expansion():
    p = fixture_program("ex2_bounded.tdl")
    assert (1, 2) in [e.word for e in enumerate_expansions(p, max_len=2)]


def test_ex3_long_expansion_enumerated():
    words = [e.word for e in enumerate_expansions(EX3, max_len=7)]
    assert (1, 2, 2, 3, 3, 3, 4) in words


def test_ex3_accept_law():
    assert in_accept(EX3, (1, 2, 2, 3, 3, 3))
    assert not in_accept(EX3, (1, 2, 2, 3, 3))


def test_init_body_alone_is_accepted():
    p = parse_program("#goal G.\nG(X) <- A(X).")
    assert in_accept(p, (1,))


def test_describe_golden_word():
    w = (1, 1, 2, 2, 3, 3, 3, 3, 3, 2, 1)
    assert format_omega(describe(EX3, w)) == GOLDEN


def test_describe_vertical_only():
    assert format_omega(describe(EX3, (1, 1))) == "{b1} {b1}"


def test_describe_single_flat_body_at_offset_zero():
    p = parse_program("#goal G.\nG(X) <- A(X), G(X).\nG(X) <- B(X).")
    assert format_omega(describe(p, (1,))) == "{b1,BOT,TOP}"


def test_omega_text_round_trip():
    word = parse_omega(GOLDEN)
    assert format_omega(word) == GOLDEN
    assert len(word) == 9 and word[3] == Letter(frozenset({3}), False, True)


def test_describe_is_correct_and_self_preceding():
    for p in (EX3, INTRO, fixture_program("hostels_pi1.tdl")):
        b = Bodies(p)
        for e in enumerate_expansions(p, max_len=6):
            d = describe(p, e.word)
            assert is_correct(b, d), e.word
            assert precedes(p, d, d)


def test_omega_database_matches_word_database():
    for e in enumerate_expansions(EX3, max_len=6):
        d_omega, _ = db_of_omega(EX3, describe(EX3, e.word))
        d_word = db_of_word(EX3, e.word)
        assert find_homomorphism(d_omega, d_word, {"X": "X", 0: 0}) is not None
        assert find_homomorphism(d_word, d_omega, {"X": "X", 0: 0}) is not None
        assert in_accept_omega(EX3, describe(EX3, e.word)) == in_accept(EX3, e.word)


def test_single_vertical_letter_database():
    d, _ = db_of_omega(EX3, parse_omega("{b1}"))
    assert {(p, t) for p, _, t in d.facts} == {("R", 0)}


def test_incorrect_word_reports_clause():
    b = Bodies(EX3)
    w = parse_omega("{b1} {b2}")
    assert not is_correct(b, w)
    assert correctness_violation(b, w)
    with pytest.raises(ValueError, match="incorrect"):
        db_of_omega(EX3, w)


def test_precedes_padded_variant():
    padded = parse_omega("{b1} {b1} {b3} {b2,b3} {b3,TOP} {b2,b3} {b2,b3,BOT} {b2,b3} {b3} {b1}")
    assert precedes(EX3, parse_omega(GOLDEN), padded)
    assert not precedes(EX3, padded, parse_omega(GOLDEN))


def test_precedes_needs_equal_vertical_segments():
    assert not precedes(EX3, parse_omega("{b1} {b1}"), parse_omega("{b1}"))


def test_height_counts_vertical_letters():
    assert height(Bodies(EX3), parse_omega(GOLDEN)) == 3


def test_alphabet_size_ex3():
    # B1 vertical; any subset of B2, B3, B4 with optional BOT/TOP
    assert len(alphabet(Bodies(EX3))) == 1 + 8 * 4


def test_word_query_matches_describe():
    w = (1, 2, 3, 3, 4)
    q = word_query(EX3, w)
    assert find_homomorphism(db_of_tcq(q), db_of_word(EX3, w), {"X": "X", 0: 0}) is not None


def test_accept_monotone_under_padding():
    b = Bodies(EX3)
    flat = [a for a in alphabet(b) if not a.bot and not a.top and 1 not in a.bodies]
    for e in enumerate_expansions(EX3, max_len=5, partial=True):
        base = describe(EX3, e.word)
        if not in_accept_omega(EX3, base) or not base or 1 in base[-1].bodies:
            continue
        for extra in itertools.islice(flat, 4):
            bigger = base + (extra,)
            if is_correct(b, bigger) and precedes(EX3, base, bigger):
                assert in_accept_omega(EX3, bigger)
