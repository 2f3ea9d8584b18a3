import random

import pytest

from tdlog.core import BudgetError, parse_database, parse_program
from tdlog.semantics import (certain_fixpoint, certain_linear, db_of_tcq, entails_linear,
                             eval_tcq, find_homomorphism, parse_tcq)

from helpers import fixture_text, random_db, random_linear_program

INTRO = "G(X) <- A(X), O R(X,Y), O D(Y).\nD(X) <- O D(X).\nD(X) <- B(X)."
INTRO_DB = "A(a)@0. R(a,b)@1. B(b)@5."


def db(text):
    return parse_database(text)


def test_eval_tcq_atom():
    assert eval_tcq(db("A(a)@0."), 0, parse_tcq("Q(X) <- A(X)."), {"X": "a"})


def test_eval_tcq_two_vacant_nights_later():
    q = parse_tcq("Q(X) <- F (Vacant(X), O Vacant(X)).")
    assert eval_tcq(db("Vacant(h)@1. Vacant(h)@2."), 0, q, {"X": "h"})


def test_sometime_is_strict():
    assert not eval_tcq(db("A(a)@0."), 0, parse_tcq("Q(X) <- F A(X)."), {"X": "a"})


def test_db_of_tcq_shapes():
    d = db_of_tcq(parse_tcq("Q(X) <- A(X), O R(X,Y)."))
    assert d.facts == {("A", ("X",), 0), ("R", ("X", "Y"), 1)}
    assert d.extent == (0, 1)
    assert db_of_tcq(parse_tcq("Q(X) <- A(X).")).extent == (0, 0)
    d = db_of_tcq(parse_tcq("Q(X) <- O-^2 B(X)."))
    assert d.facts == {("B", ("X",), -2)} and d.extent == (-2, 0)


def test_homomorphism_examples():
    src = db_of_tcq(parse_tcq("Q(X) <- A(X), O R(X,Y)."))
    dst = db("A(a)@0. R(a,b)@1.")
    objs, shift = find_homomorphism(src, dst, {"X": "a", 0: 0})
    assert objs["Y"] == "b" and shift == 0
    objs, shift = find_homomorphism(dst, dst)
    assert all(objs[k] == k for k in dst.domain) and shift == 0
    assert find_homomorphism(db_of_tcq(parse_tcq("Q(X) <- A(X).")), db("B(a)@0.")) is None


def test_homomorphism_inconsistent_anchors():
    src = db_of_tcq(parse_tcq("Q(X) <- A(X), O A(X)."))
    with pytest.raises(ValueError):
        find_homomorphism(src, src, {0: 0, 1: 5})


def test_intro_derivation():
    p = parse_program(INTRO)
    d = db(INTRO_DB)
    assert certain_fixpoint(p, d, "G") == [(("a",), 0)]
    assert certain_linear(p, d, "G") == [(("a",), 0)]
    dd = certain_fixpoint(p, d, "D")
    assert {(("b",), t) for t in range(1, 6)} <= set(dd)


def test_no_initialisation_match_gives_nothing():
    p = parse_program(INTRO)
    assert certain_fixpoint(p, db("A(a)@0. R(a,b)@1."), "G") == []


def test_hostels_success_from_h1():
    p = parse_program("Success(X) <- Vacant(X), O busService(X,Y), O Success(Y).\n"
                      "Success(X) <- Vacant(X), O Vacant(X).")
    d = db("Vacant(h1)@1. busService(h1,h2)@2. Vacant(h2)@2. busService(h2,h3)@3. "
           "Vacant(h2)@3. Vacant(h2)@4. Vacant(h4)@1.")
    ans = certain_fixpoint(p, d, "Success")
    assert (("h1",), 1) in ans
    assert ans == certain_linear(p, d, "Success")


def test_ex3_word_database():
    from tdlog.expansions import in_accept
    p = parse_program(fixture_text("ex3.tdl"))
    assert in_accept(p, (1, 2, 2, 3, 3, 3))


def test_entails_linear_point_query():
    p = parse_program(INTRO)
    d = db(INTRO_DB)
    assert entails_linear(p, d, "G", ("a",), 0)
    assert not entails_linear(p, d, "G", ("b",), 0)


def test_fixpoint_budget():
    p = parse_program("G(X) <- F A(X).\nG(X) <- O G(X).")
    with pytest.raises(BudgetError):
        certain_fixpoint(p, db("A(a)@0."), "G", budget_window=1)


def test_random_linear_programs_agree():
    rng = random.Random(3)
    for _ in range(30):
        p = random_linear_program(rng)
        d = random_db(rng)
        assert certain_linear(p, d) == certain_fixpoint(p, d)

