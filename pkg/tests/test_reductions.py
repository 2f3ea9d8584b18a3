import pytest

from tdlog.core import ParseError, validate
from tdlog.reductions import (LOOPING_MACHINE, CounterMachine, format_machine,
                              gen_machine_program, gen_reachability_db, layer_object,
                              parse_graph, parse_machine, reachable, run_machine)
from tdlog.semantics import certain_fixpoint

from helpers import fixture_text

TOTAL_LOOP = parse_machine(fixture_text("loop.cm"))


def goal_at_source(m, edges, s, t):
    prog = gen_machine_program(m).program
    db = gen_reachability_db(m, edges, s, t)
    return ((layer_object(s, 0),), 0) in certain_fixpoint(prog, db)


def test_looping_machine_program_shape():
    mp = gen_machine_program(LOOPING_MACHINE)
    p = mp.program
    ne = {x for x in p.idb if x.startswith("NE") and not x.endswith("_star")}
    assert len(ne) == 6
    assert {"S0", "RV", "G"} <= p.idb
    # 1 + 3 RV, 16 NE, 12 distinct violation rules, 1 transition, 1 goal, 14 star rules
    assert len(p.rules) == 48
    d = validate(p)
    assert d.linear and d.monadic and d.connected


def test_identical_ne_bodies_are_flagged():
    notes = gen_machine_program(LOOPING_MACHINE).notes
    assert len(notes) == 6
    assert any("NE1_minus" in n and "NE1_plus" in n for n in notes)


def test_empty_transition_function():
    m = CounterMachine(["s0"], {})
    p = gen_machine_program(m).program
    viol = [r for r in p.rules if r.head_pred == "S0" and any(a.pred.startswith("NE") for a in r.body)]
    # every ε for each counter, with and without a later U atom
    assert len(viol) == 12
    assert not any(a.pred == "T" for r in p.rules if r.head_pred == "S0" for a in r.body)


def test_run_looping_machine():
    run = run_machine(LOOPING_MACHINE, 5)
    assert run.configs == [("s0", 0, 0)] * 6 and not run.halted


def test_run_undefined_start_halts():
    run = run_machine(CounterMachine(["s0"], {}), 5)
    assert run.configs == [("s0", 0, 0)] and run.halted


def test_run_increment_then_stuck():
    m = CounterMachine(["s0", "s1"], {("s0", "0", "0"): ("s1", 1, 0)})
    run = run_machine(m, 5)
    assert run.halted and len(run.configs) == 2
    assert run.counters(1) == (1, 0)


def test_negative_counter_is_an_error():
    m = CounterMachine(["s0"], {("s0", "0", "0"): ("s0", -1, 0)})
    with pytest.raises(ValueError):
        run_machine(m, 2)


def test_machine_text_round_trip():
    assert parse_machine(format_machine(TOTAL_LOOP)) == TOTAL_LOOP


def test_bad_machine_text():
    with pytest.raises(ParseError):
        parse_machine("state s0.\ntrans s0 0 0 -> s9 0 0.")
    with pytest.raises(ParseError):
        parse_graph("edge a.")


def test_reachability_database_contents():
    db = gen_reachability_db(TOTAL_LOOP, [("vs", "vt")], "vs", "vt")
    assert ("T", ("vs_0", "vt_1"), 0) in db.facts
    assert ("U1", ("vt_0", "vt_0"), 1) in db.facts


def test_directed_path_is_found():
    edges = parse_graph(fixture_text("path.graph"))
    assert goal_at_source(TOTAL_LOOP, edges, "vs", "vt")


def test_unreachable_target():
    assert not goal_at_source(TOTAL_LOOP, [("vs", "v1"), ("vt", "v1")], "vs", "vt")


def test_source_equals_target():
    assert goal_at_source(TOTAL_LOOP, [("vs", "v1")], "vs", "vs")


def test_partial_loop_gives_false_positive():
    # with only (0,0) defined, the rules for the undefined tests derive
    # state atoms on layers that no path reaches
    edges = [("v0", "v2"), ("v1", "v2"), ("v2", "v1")]
    assert not reachable(edges, "v1", "v0")
    assert goal_at_source(LOOPING_MACHINE, edges, "v1", "v0")
    assert not goal_at_source(TOTAL_LOOP, edges, "v1", "v0")
