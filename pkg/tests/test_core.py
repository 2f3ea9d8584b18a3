import pytest

from tdlog.core import (ParseError, TemporalAtom, format_program, parse_database,
                        parse_program, validate)

INTRO = "G(X) <- A(X), O R(X,Y), O D(Y).\nD(X) <- O D(X).\nD(X) <- B(X)."


def test_parse_intro_program():
    p = parse_program(INTRO)
    assert len(p.rules) == 3
    assert p.idb == {"G", "D"}
    assert p.linear and p.monadic and p.connected and p.next_only


def test_single_initialisation_rule():
    p = parse_program("G(X) <- A(X).")
    assert not p.recursive
    assert validate(p).rules[0]["kind"] == "initialization"


def test_next_and_previous_cancel():
    p = parse_program("G(X) <- O O- A(X).")
    assert p.rules[0].body[0].prefix == ()


def test_prefix_powers_and_sometime():
    a = parse_program("G(X) <- O^2 F A(X).").rules[0].body[0]
    assert a.prefix == (2, "F")
    assert a.offset is None
    assert TemporalAtom("A", ("X",), (1, 1, -1)).offset == 1


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_program("G(X) <- A(X)\nG(X) <- ,")
    assert e.value.line >= 1


@pytest.mark.parametrize("text", [
    "G(X) <- A(X), A(X,Y).",      # arity mismatch
    "G(X) <- A(Y).",              # head variable missing
    "G(X) <- A(c).",              # constant in a rule
])
def test_rejected_programs(text):
    with pytest.raises(ParseError):
        parse_program(text)


def test_parse_database_extent_and_domain():
    db = parse_database("A(a)@0. R(a,b)@1. B(b)@5.")
    assert db.extent == (0, 5)
    assert db.domain == {"a", "b"}


def test_empty_database_rejected():
    with pytest.raises(ParseError):
        parse_database("")


def test_negative_timestamps_and_duplicates():
    db = parse_database("P(c)@-3. P(c)@4. P(c)@4.")
    assert db.extent == (-3, 4)
    assert len(db.facts) == 2


def test_database_rejects_variables():
    with pytest.raises(ParseError):
        parse_database("P(X)@0.")


def test_validate_hostels_pi1():
    p = parse_program("Success(X) <- Vacant(X), O busService(X,Y), O Success(Y).\n"
                      "Success(X) <- Vacant(X), O Vacant(X).")
    d = validate(p)
    assert d.linear and d.monadic and d.connected and d.next_only and d.recursive


def test_validate_disconnected_and_nonlinear():
    assert not validate(parse_program("D(X) <- A(Y), B(X).")).connected
    assert not validate(parse_program("G(X) <- R(X,Y), G(Y), G(X).")).linear


def test_format_round_trip():
    p = parse_program("#goal G.\n" + INTRO)
    again = parse_program(format_program(p))
    assert again == p
