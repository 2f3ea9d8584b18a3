"""Command-line frontend: ``tdlog <eval|rewrite|expand|classify|decompose|reduce> ...``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .automata import DEFAULT_BUDGET, build_accept_dfa, dump_automaton
from .core import (BudgetError, FragmentError, ParseError, format_database, format_program,
                   parse_database, parse_program)

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2))


def _read(path) -> str:
    if path is None:
        raise ValueError("missing input file")
    return Path(path).read_text()


def _program(args):
    prog = parse_program(_read(args.program))
    goal = args.goal or prog.goal
    if goal is None:
        raise ValueError("no goal: use --goal or a #goal directive")
    if goal not in prog.idb:
        raise ValueError(f"goal {goal} is not an IDB predicate")
    return prog.with_goal(goal)


def cmd_eval(args) -> int:
    from .semantics import certain_fixpoint, certain_linear, entails_linear, format_answers
    prog = _program(args)
    db = parse_database(_read(args.db))
    engine = args.engine or ("linear" if prog.linear else "fixpoint")
    point = args.tuple is not None or args.time is not None
    if point and not args.all:
        if args.tuple is None or args.time is None:
            raise ValueError("a point query needs both --tuple and --time")
        tup = tuple(x for x in args.tuple.split(",") if x)
        if engine == "linear":
            ok = entails_linear(prog, db, prog.goal, tup, args.time)
        else:
            ok = (tup, args.time) in certain_fixpoint(prog, db, budget_window=args.budget_window)
        _emit(ok)
        return EXIT_OK if ok else EXIT_FALSE
    if engine == "linear":
        ans = certain_linear(prog, db)
    else:
        ans = certain_fixpoint(prog, db, budget_window=args.budget_window)
    _emit(format_answers(ans))
    return EXIT_OK


def cmd_rewrite(args) -> int:
    from .rewriter import eval_fo, format_fo, rewrite_tcq
    from .semantics import parse_tcq
    q = parse_tcq(_read(args.program))
    f = rewrite_tcq(q)
    if args.db is None:
        if args.json:
            _emit({"query": str(q), "formula": format_fo(f)})
        else:
            print(format_fo(f))
        return EXIT_OK
    import itertools
    db = parse_database(_read(args.db))
    objs = sorted(db.domain)
    hits = []
    for tup in itertools.product(objs, repeat=len(q.answer_vars)):
        for t in db.times:
            if eval_fo(db, f, {**dict(zip(q.answer_vars, tup)), "t": t}):
                hits.append({"tuple": list(tup), "time": t})
    hits.sort(key=lambda h: (h["time"], h["tuple"]))
    _emit(hits)
    return EXIT_OK


def _body_word(word) -> str:
    return "".join(f"B{b}" for b in word)


def cmd_expand(args) -> int:
    from .expansions import (Bodies, alphabet, enumerate_expansions, format_omega,
                             in_accept, in_accept_omega, is_correct)
    prog = _program(args)
    rows = []
    if args.sample:
        # random correct Ω-words
        bodies = Bodies(prog)
        letters = sorted(alphabet(bodies), key=str)
        rng = random.Random(args.seed)
        tries = 0
        while len(rows) < args.sample and tries < 1000 * args.sample:
            tries += 1
            w = tuple(rng.choice(letters) for _ in range(rng.randint(1, args.max_len)))
            if is_correct(bodies, w):
                rows.append({"word": format_omega(w), "accepted": in_accept_omega(prog, w)})
    else:
        for e in enumerate_expansions(prog, max_len=args.max_len, partial=args.check_accept):
            row = {"word": _body_word(e.word), "complete": e.complete}
            if args.check_accept:
                row["accepted"] = in_accept(prog, e.word)
            rows.append(row)
    if args.json:
        _emit(rows)
    else:
        for r in rows:
            flags = []
            if "complete" in r:
                flags.append("complete" if r["complete"] else "partial")
            if "accepted" in r:
                flags.append("accepted" if r["accepted"] else "-")
            print(f"{r['word']}\t" + "\t".join(flags))
    return EXIT_OK


def cmd_classify(args) -> int:
    from .classifier import classify
    prog = _program(args)
    verdict = classify(prog, budget=args.budget_states)
    _emit(verdict.as_dict())
    if args.dump_automata and prog.next_only:
        out = Path(args.dump_automata)
        out.mkdir(parents=True, exist_ok=True)
        d = build_accept_dfa(prog, budget=args.budget_states)
        adj, letters = dump_automaton(d, "accept")
        (out / "accept.txt").write_text(adj)
        (out / "accept.letters").write_text(letters)
    return EXIT_OK


def cmd_decompose(args) -> int:
    from .classifier import decompose
    prog = _program(args)
    acc = build_accept_dfa(prog, budget=args.budget_states)
    pi_d, pi_t = decompose(prog, accept=acc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "pi_d.tdl").write_text(format_program(pi_d))
    (out / "pi_t.tdl").write_text(format_program(pi_t))
    if args.dump_automata:
        adj, letters = dump_automaton(acc, "accept")
        (out / "accept.txt").write_text(adj)
        (out / "accept.letters").write_text(letters)
    _emit({"pi_d": str(out / "pi_d.tdl"), "pi_d_rules": len(pi_d.rules),
           "pi_t": str(out / "pi_t.tdl"), "pi_t_rules": len(pi_t.rules),
           "accept_states": acc.size,
           "letters": {f"L{i}": str(a) for i, a in enumerate(acc.alphabet)}})
    return EXIT_OK


def cmd_reduce(args) -> int:
    from .reductions import gen_machine_program, gen_reachability_db, parse_graph, parse_machine
    m = parse_machine(_read(args.machine))
    mp = gen_machine_program(m)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "machine.tdl").write_text(format_program(mp.program))
    report = {"program": str(out / "machine.tdl"), "rules": len(mp.program.rules),
              "notes": mp.notes}
    if args.graph:
        edges = parse_graph(_read(args.graph))
        if not args.source or not args.target:
            raise ValueError("--graph needs --source and --target")
        db = gen_reachability_db(m, edges, args.source, args.target)
        (out / "reach.tdb").write_text(format_database(db))
        report["db"] = str(out / "reach.tdb")
        report["facts"] = len(db.facts)
    _emit(report)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "rewrite": cmd_rewrite, "expand": cmd_expand,
            "classify": cmd_classify, "decompose": cmd_decompose, "reduce": cmd_reduce}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="program (or query) file; same as --program")
    common.add_argument("--program")
    common.add_argument("--db")
    common.add_argument("--goal")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget-states", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--budget-window", type=int, default=4096)
    common.add_argument("--dump-automata", metavar="DIR")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="tdlog", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("eval", parents=[common], help="certain answers")
    e.add_argument("--tuple", help="comma-separated objects of a point query")
    e.add_argument("--time", type=int)
    e.add_argument("--all", action="store_true", help="list every certain answer")
    e.add_argument("--engine", choices=["linear", "fixpoint"])
    sub.add_parser("rewrite", parents=[common], help="temporal CQ to FO(<)")
    x = sub.add_parser("expand", parents=[common], help="list expansions")
    x.add_argument("--max-len", type=int, default=5)
    x.add_argument("--check-accept", action="store_true")
    x.add_argument("--sample", type=int, default=0, help="sample this many correct Ω-words instead")
    sub.add_parser("classify", parents=[common], help="data complexity verdict")
    d = sub.add_parser("decompose", parents=[common], help="plain datalog and LTL parts")
    d.add_argument("--out", default=".")
    r = sub.add_parser("reduce", parents=[common], help="counter-machine program and graph database")
    r.add_argument("--machine")
    r.add_argument("--graph")
    r.add_argument("--source")
    r.add_argument("--target")
    r.add_argument("--out", default=".")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.input and not args.program:
        args.program = args.input
    if args.command == "reduce" and args.machine is None:
        args.machine = args.program
    if args.budget_states <= 0 or args.budget_window <= 0:
        print("error: budgets must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParseError, FragmentError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
