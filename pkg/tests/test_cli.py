import json
from pathlib import Path

import pytest

import tdlog
from tdlog.cli import main

FIX = Path(tdlog.__file__).parent / "fixtures"
DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_intro(capsys):
    code, out, _ = run(capsys, "eval", FIX / "intro.tdl", "--db", FIX / "intro.tdb")
    assert code == 0
    assert json.loads(out) == [{"tuple": ["a"], "time": 0}]


def test_eval_engines_agree(capsys):
    outs = [run(capsys, "eval", FIX / "intro.tdl", "--db", FIX / "intro.tdb", "--engine", e)[1]
            for e in ("linear", "fixpoint")]
    assert outs[0] == outs[1]


def test_eval_point_query_false(capsys):
    code, out, _ = run(capsys, "eval", FIX / "intro.tdl", "--db", FIX / "intro.tdb",
                       "--tuple", "b", "--time", "0")
    assert code == 1 and json.loads(out) is False


def test_eval_point_query_true(capsys):
    code, out, _ = run(capsys, "eval", FIX / "intro.tdl", "--db", FIX / "intro.tdb",
                       "--tuple", "a", "--time", "0", "--engine", "fixpoint")
    assert code == 0 and json.loads(out) is True


def test_eval_hostels_all(capsys):
    code, out, _ = run(capsys, "eval", FIX / "hostels_pi1.tdl", "--db", FIX / "hostels.tdb", "--all")
    assert code == 0 and json.loads(out)


def test_missing_file_is_input_error(capsys):
    code, _, err = run(capsys, "eval", "no_such.tdl", "--db", FIX / "intro.tdb")
    assert code == 2 and "error" in err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.tdl"
    bad.write_text("G(X) <- A(X")
    assert run(capsys, "classify", bad)[0] == 2


def test_non_positive_budget(capsys):
    assert run(capsys, "classify", FIX / "ex2_bounded.tdl", "--budget-states", "0")[0] == 2


def test_budget_exceeded(capsys):
    code, _, err = run(capsys, "classify", FIX / "ex2_bounded.tdl", "--budget-states", "5")
    assert code == 3 and "budget" in err


def test_rewrite_pi2(capsys):
    code, out, _ = run(capsys, "rewrite", FIX / "pi2.tcq")
    assert code == 0 and "Vacant" in out and "E" in out


def test_rewrite_on_database(capsys):
    code, out, _ = run(capsys, "rewrite", FIX / "pi2.tcq", "--db", FIX / "hostels.tdb")
    assert code == 0
    assert all(set(h) == {"tuple", "time"} for h in json.loads(out))


def test_expand_ex3_marks_accepted(capsys):
    code, out, _ = run(capsys, "expand", FIX / "ex3.tdl", "--max-len", "7", "--check-accept", "--json")
    rows = {r["word"]: r for r in json.loads(out)}
    assert code == 0
    assert rows["B1B2B2B3B3B3"]["accepted"]
    assert not rows["B1B2B2B3B3"]["accepted"]


def test_expand_sample_is_seeded(capsys):
    args = ("expand", FIX / "ex3.tdl", "--sample", "5", "--max-len", "4", "--json")
    a = run(capsys, *args, "--seed", "3")[1]
    b = run(capsys, *args, "--seed", "3")[1]
    assert a == b and len(json.loads(a)) == 5


def test_classify_unbounded(capsys):
    code, out, _ = run(capsys, "classify", FIX / "ex2_unbounded.tdl")
    v = json.loads(out)
    assert code == 0 and v["class"] == "L_HARD_IN_NL" and not v["vertically_bounded"]


def test_classify_is_deterministic(capsys):
    a = run(capsys, "classify", FIX / "ex2_bounded.tdl")[1]
    b = run(capsys, "classify", FIX / "ex2_bounded.tdl")[1]
    assert a == b


def test_classify_dumps_automata(tmp_path, capsys):
    run(capsys, "classify", FIX / "ex2_bounded.tdl", "--dump-automata", tmp_path)
    assert (tmp_path / "accept.txt").read_text().startswith("# automaton accept")


def test_decompose_writes_programs(tmp_path, capsys):
    code, out, _ = run(capsys, "decompose", DATA / "until.tdl", "--out", tmp_path)
    rep = json.loads(out)
    assert code == 0 and rep["pi_d_rules"] > 0
    assert (tmp_path / "pi_d.tdl").exists() and (tmp_path / "pi_t.tdl").exists()


def test_reduce_writes_program_and_db(tmp_path, capsys):
    code, out, _ = run(capsys, "reduce", "--machine", FIX / "loop.cm", "--graph", FIX / "path.graph",
                       "--source", "vs", "--target", "vt", "--out", tmp_path)
    assert code == 0
    rep = json.loads(out)
    assert rep["rules"] > 0 and rep["facts"] > 0
    code, out, _ = run(capsys, "eval", tmp_path / "machine.tdl", "--db", tmp_path / "reach.tdb",
                       "--tuple", "vs_0", "--time", "0")
    assert code == 0


def test_unknown_goal(capsys):
    assert run(capsys, "classify", FIX / "ex3.tdl", "--goal", "Nope")[0] == 2


@pytest.mark.parametrize("cmd", ["eval", "rewrite", "expand", "classify", "decompose", "reduce"])
def test_help_for_every_subcommand(cmd, capsys):
    with pytest.raises(SystemExit) as e:
        main([cmd, "--help"])
    assert e.value.code == 0
