import random

import pytest

from tdlog.core import parse_database
from tdlog.rewriter import (And, ExistsTime, FAtom, Less, Max, Min, SortError, Succ,
                            boundary_formula, eval_fo, expand_macros, format_fo, rewrite_tcq)
from tdlog.semantics import eval_tcq, parse_tcq

from helpers import random_db, random_tcq

HOSTELS = ("Vacant(h1)@1. Vacant(h3)@2. Vacant(h2)@3. Vacant(h2)@4. Vacant(h4)@4. "
           "busService(h1,h2)@2.")


def reference_pi2(db, x, t):
    # E t'. t < t' & Vacant(x, t') & Vacant(x, t'+1)
    f = ExistsTime("u", And((Less("t", "u"), FAtom("Vacant", ("X",), "u"),
                             ExistsTime("v", And((Succ("u", "v"), FAtom("Vacant", ("X",), "v")))))))
    return eval_fo(db, f, {"X": x, "t": t})


def test_base_case_is_the_atom():
    assert rewrite_tcq(parse_tcq("Q(X) <- R(X).")) == FAtom("R", ("X",), "t")


def test_two_vacant_nights_matches_reference():
    q = parse_tcq("Q(X) <- F (Vacant(X), O Vacant(X)).")
    f = rewrite_tcq(q)
    rng = random.Random(5)
    for _ in range(40):
        d = random_db(rng, unary=("Vacant",), binary=(), max_dom=3)
        for x in sorted(d.domain):
            for t in d.times:
                want = eval_tcq(d, t, q, {"X": x})
                assert eval_fo(d, f, {"X": x, "t": t}) == want == reference_pi2(d, x, t)


def test_hostel_database_h3_promising_at_zero():
    d = parse_database(HOSTELS)
    f = rewrite_tcq(parse_tcq("Q(X) <- F (Vacant(X), O Vacant(X))."))
    assert eval_fo(d, f, {"X": "h2", "t": 1})
    assert not eval_fo(d, f, {"X": "h1", "t": 1})


def test_order_predicates():
    d = parse_database("A(a)@0. A(a)@5.")
    assert eval_fo(d, Less("x", "y"), {"x": 0, "y": 1})
    assert eval_fo(d, Min("t"), {"t": 0})
    assert not eval_fo(d, Min("t"), {"t": 1})
    assert eval_fo(d, Max("t"), {"t": 5})


def test_sort_mismatch():
    d = parse_database("A(a)@0.")
    with pytest.raises(SortError):
        eval_fo(d, Less("x", "y"), {"x": "a", "y": 1})
    with pytest.raises(SortError):
        eval_fo(d, FAtom("A", ("X",), "t"), {"X": 0, "t": 0})


def test_boundary_formula_beyond_extent():
    d = parse_database("A(a)@0. B(a)@1.")
    q = parse_tcq("Q(X) <- O- A(X).")
    # at r+1 the previous point is r, where only B holds
    assert not eval_fo(d, boundary_formula(q, 1), {"X": "a"})
    q = parse_tcq("Q(X) <- O- B(X).")
    assert eval_fo(d, boundary_formula(q, 1), {"X": "a"})


def test_macros_only_use_order():
    q = parse_tcq("Q(X) <- O A(X), P B(X).")
    f = rewrite_tcq(q)
    g = expand_macros(f)
    text = format_fo(g)
    assert "min" not in text and "max" not in text and "+1" not in text
    rng = random.Random(11)
    for _ in range(20):
        d = random_db(rng)
        for x in sorted(d.domain):
            for t in d.times:
                b = {"X": x, "t": t}
                assert eval_fo(d, f, b) == eval_fo(d, g, b)


def test_random_queries_small():
    rng = random.Random(2)
    for _ in range(40):
        q = random_tcq(rng)
        d = random_db(rng, binary=("R", "S"))
        f = rewrite_tcq(q)
        for x in sorted(d.domain):
            for t in d.times:
                b = dict(zip(q.answer_vars, [x]))
                assert eval_fo(d, f, {**b, "t": t}) == eval_tcq(d, t, q, b)
