"""Random instance generators shared by the property suites."""

import random

from tdlog.core import Conj, Program, Rule, TemporalAtom, TemporalDatabase
from tdlog.semantics import TemporalCQ

PREFIXES = [(), (), (1,), (-1,), (2,), (-2,), ("F",), ("P",), (1, "F"), ("P", -1)]
NEXT_PREFIXES = [(), (), (1,), (-1,), (2,)]


def random_db(rng: random.Random, unary=("A", "B"), binary=("R",), max_dom=4, max_len=6):
    dom = [f"c{i}" for i in range(rng.randint(1, max_dom))]
    l = rng.randint(-2, 2)
    r = l + rng.randint(0, max_len - 1)
    facts = set()
    for _ in range(rng.randint(1, 10)):
        t = rng.randint(l, r)
        if binary and rng.random() < 0.4:
            facts.add((rng.choice(binary), (rng.choice(dom), rng.choice(dom)), t))
        else:
            facts.add((rng.choice(unary), (rng.choice(dom),), t))
    return TemporalDatabase.from_facts(facts, (l, r))


def _edb_atom(rng, vars_, prefixes):
    if rng.random() < 0.35:
        return TemporalAtom("R", (rng.choice(vars_), rng.choice(vars_)), rng.choice(prefixes))
    return TemporalAtom(rng.choice("AB"), (rng.choice(vars_),), rng.choice(prefixes))


def random_linear_program(rng: random.Random, next_only=False, max_rules=4):
    prefixes = NEXT_PREFIXES if next_only else PREFIXES
    idbs = ["G", "D"]
    rules = [Rule("G", ("X",), (_edb_atom(rng, ["X"], prefixes),))]
    for _ in range(rng.randint(0, max_rules - 1)):
        head = rng.choice(idbs)
        vars_ = ["X", "Y"]
        body = [_edb_atom(rng, vars_, prefixes) for _ in range(rng.randint(0, 2))]
        if rng.random() < 0.75:
            body.append(TemporalAtom(rng.choice(idbs), (rng.choice(vars_),), rng.choice(prefixes)))
        if not any("X" in a.args for a in body):
            body.append(TemporalAtom(rng.choice("AB"), ("X",), rng.choice(prefixes)))
        rules.append(Rule(head, ("X",), tuple(body)))
    return Program(tuple(rules), "G")


def random_formula(rng, vars_, ops, depth=0):
    if depth < 2 and rng.random() < 0.3:
        parts = tuple(random_formula(rng, vars_, ops, depth + 1) for _ in range(2))
        return Conj(parts, _take_ops(rng, ops))
    if rng.random() < 0.4:
        atom = TemporalAtom(rng.choice(["R", "S"]), (rng.choice(vars_), rng.choice(vars_)))
    else:
        atom = TemporalAtom(rng.choice("AB"), (rng.choice(vars_),))
    return TemporalAtom(atom.pred, atom.args, _take_ops(rng, ops))


def _take_ops(rng, ops):
    out = []
    while ops[0] > 0 and rng.random() < 0.5:
        ops[0] -= 1
        out.append(rng.choice([1, -1, "F", "P"]))
    return tuple(out)


def random_tcq(rng: random.Random, max_ops=3, max_vars=3):
    vars_ = ["X", "Y", "Z"][: rng.randint(1, max_vars)]
    ops = [max_ops]
    body = tuple(random_formula(rng, vars_, ops) for _ in range(rng.randint(1, 3)))
    used = []
    for f in body:
        stack = [f]
        while stack:
            g = stack.pop()
            if isinstance(g, TemporalAtom):
                used.extend(g.args)
            else:
                stack.extend(g.parts)
    answer = tuple(sorted(set(used)))[:1]
    return TemporalCQ(answer, body)


def fixture_text(name: str) -> str:
    from pathlib import Path
    import tdlog
    return (Path(tdlog.__file__).parent / "fixtures" / name).read_text()


def fixture_program(name: str):
    from tdlog.core import parse_program
    return parse_program(fixture_text(name))


def data_program(name: str):
    from pathlib import Path
    from tdlog.core import parse_program
    return parse_program((Path(__file__).parent / "data" / name).read_text())
