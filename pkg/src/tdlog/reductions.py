"""Two-counter machines, the program that traces them backwards, and reachability databases."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import ParseError, Program, Rule, TemporalAtom, TemporalDatabase

SIGNS = ("0", "+")
DELTAS = (-1, 0, 1)


@dataclass
class CounterMachine:
    """States are names; ``delta`` maps (state, sgn a, sgn b) to (state, da, db).

    The first state is the initial one."""
    states: list
    delta: dict = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.states)
        if not self.states:
            raise ValueError("machine needs at least one state")
        for (s, a, b), (s2, da, db) in self.delta.items():
            if s not in known or s2 not in known:
                raise ValueError(f"unknown state in transition from {s}")
            if a not in SIGNS or b not in SIGNS:
                raise ValueError(f"bad counter test in transition from {s}")
            if da not in DELTAS or db not in DELTAS:
                raise ValueError(f"bad counter update in transition from {s}")

    @property
    def initial(self) -> str:
        return self.states[0]


@dataclass
class ComputationPrefix:
    configs: list
    halted: bool

    def counters(self, k: int) -> tuple:
        _, a, b = self.configs[k]
        return a, b


def sgn(x: int) -> str:
    return "+" if x > 0 else "0"


def run_machine(m: CounterMachine, max_steps: int) -> ComputationPrefix:
    s, a, b = m.initial, 0, 0
    configs = [(s, a, b)]
    for _ in range(max_steps):
        step = m.delta.get((s, sgn(a), sgn(b)))
        if step is None:
            return ComputationPrefix(configs, True)
        s, da, db = step
        a, b = a + da, b + db
        if a < 0 or b < 0:
            raise ValueError(f"counter goes negative after {len(configs)} steps")
        configs.append((s, a, b))
    return ComputationPrefix(configs, m.delta.get((s, sgn(a), sgn(b))) is None)


# ---------------------------------------------------------------- program

def _ne_name(c: int, eps: int) -> str:
    return f"NE{c}_" + {-1: "minus", 0: "zero", 1: "plus"}[eps]


def _star_name(pred: str) -> str:
    return f"{pred}_star"


def _atom(pred, args, sometime=0):
    return TemporalAtom(pred, args, ("F",) * sometime)


@dataclass
class MachineProgram:
    program: Program
    state_pred: dict
    notes: list


def gen_machine_program(m: CounterMachine, goal: str = "G") -> MachineProgram:
    """Query whose expansions trace computations of ``m`` backwards.

    The reflexive sometime prefix on an atom P(V) is replaced by an auxiliary
    IDB ``P_star`` with rules P_star(V) <- P(V) and P_star(V) <- F P(V)."""
    X, Y, Z = "X", "Y", "Z"
    S = {s: f"S{i}" for i, s in enumerate(m.states)}
    rules = []
    starred = []

    def star(pred):
        if pred not in starred:
            starred.append(pred)
        return _atom(_star_name(pred), (Y if pred.startswith("NE") else X,))

    # any state from a representation violation
    for s in m.states:
        rules.append(Rule(S[s], (X,), (star("RV"),)))
    rules.append(Rule("RV", (X,), (_atom("T", (X, Y)), _atom("T", (X, Z), 1))))
    rules.append(Rule("RV", (X,), (_atom("U1", (X, Y)), _atom("U1", (X, Z), 1))))
    rules.append(Rule("RV", (X,), (_atom("U2", (X, Y)), _atom("U2", (X, Z), 1))))
    # counter checks, as printed
    for c in (1, 2):
        u = f"U{c}"
        fam = [
            (-1, (_atom(u, (Y, Z)), _atom(u, (X, Y)))),
            (-1, (_atom(u, (Y, Z)), _atom(u, (X, Y), 2))),
            (-1, (_atom(u, (X, Y)), _atom(u, (Y, Z), 1))),
            (1, (_atom(u, (Y, Z)), _atom(u, (X, Y)))),
            (1, (_atom(u, (Y, Z)), _atom(u, (X, Y), 1))),
            (1, (_atom(u, (X, Y)), _atom(u, (Y, Z), 2))),
            (0, (_atom(u, (Y, Z)), _atom(u, (X, Y), 1))),
            (0, (_atom(u, (X, Y)), _atom(u, (Y, Z), 1))),
        ]
        for eps, body in fam:
            rules.append(Rule(_ne_name(c, eps), (Y,), body))
    notes = []
    bodies: dict = {}
    for r in rules:
        if r.head_pred.startswith("NE"):
            bodies.setdefault(r.body, []).append(r.head_pred)
    for body, heads in bodies.items():
        if len(set(heads)) > 1:
            notes.append(f"identical bodies for {', '.join(heads)}: "
                         + ", ".join(map(str, body)))

    # states from transition violations
    def violation_rules(s, alpha, beta, e1, e2):
        out = []
        for c, eps, sign in ((1, e1, alpha), (2, e2, beta)):
            if eps is None:
                continue
            out.append(Rule(S[s], (X,), (star(_ne_name(c, eps)),
                                         _atom(f"U{c}", (X, Y), int(sign == "+")))))
        return out
    for s in m.states:
        for alpha in SIGNS:
            for beta in SIGNS:
                step = m.delta.get((s, alpha, beta))
                if step is not None:
                    rules += violation_rules(s, alpha, beta, step[1], step[2])
                else:
                    for eps in DELTAS:
                        rules += violation_rules(s, alpha, beta, eps, None)
                        rules += violation_rules(s, alpha, beta, None, eps)
    # following a transition
    for (s, alpha, beta), (s2, _, _) in sorted(m.delta.items()):
        rules.append(Rule(S[s], (X,), (_atom("T", (X, Y)),
                                       _atom("U1", (X, Y), int(alpha == "+")),
                                       _atom("U2", (X, Y), int(beta == "+")),
                                       _atom(S[s2], (Y,)))))
    rules.append(Rule(goal, (X,), (_atom(S[m.initial], (X,)), _atom("U1", (X, Y)),
                                   _atom("U2", (X, Y)))))
    for pred in starred:
        v = Y if pred.startswith("NE") else X
        rules.append(Rule(_star_name(pred), (v,), (_atom(pred, (v,)),)))
        rules.append(Rule(_star_name(pred), (v,), (_atom(pred, (v,), 1),)))
    return MachineProgram(Program(tuple(_dedupe(rules)), goal), S, notes)


def _dedupe(rules):
    seen, out = set(), []
    for r in rules:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


# ---------------------------------------------------------------- databases

def layer_object(v: str, k: int) -> str:
    return f"{v}_{k}"


def gen_reachability_db(m: CounterMachine, graph, s: str, t: str) -> TemporalDatabase:
    """Layered database: the goal holds at (s_0, 0) iff t is reachable from s.

    Needs a machine that runs at least |V| - 1 steps; a looping machine
    always does."""
    nodes = sorted({s, t} | {x for e in graph for x in e})
    n = len(nodes) - 1
    run = run_machine(m, n)
    if len(run.configs) < n + 1:
        raise ValueError(f"machine halts after {len(run.configs) - 1} steps; need {n}")
    facts = set()
    for k in range(n + 1):
        o = layer_object(t, k)
        facts.add(("U1", (o, o), 0))
        facts.add(("U1", (o, o), 1))
    for u, v in graph:
        for k in range(n):
            a, b = run.counters(k)
            src, dst = layer_object(u, k), layer_object(v, k + 1)
            facts.add(("T", (src, dst), 0))
            facts.add(("U1", (src, dst), a))
            facts.add(("U2", (src, dst), b))
    return TemporalDatabase.from_facts(facts)


def reachable(graph, s: str, t: str) -> bool:
    seen, stack = {s}, [s]
    while stack:
        u = stack.pop()
        for a, b in graph:
            if a == u and b not in seen:
                seen.add(b)
                stack.append(b)
    return t in seen


# ---------------------------------------------------------------- text formats

_STATE = re.compile(r"state\s+([A-Za-z_]\w*)\s*\.$")
_TRANS = re.compile(r"trans\s+(\w+)\s+([0+])\s+([0+])\s*->\s*(\w+)\s+([-+]?[01])\s+([-+]?[01])\s*\.$")
_EDGE = re.compile(r"edge\s+([a-z_]\w*)\s+([a-z_]\w*)\s*\.$")


def _lines(text):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if line:
            yield no, line


def parse_machine(text: str) -> CounterMachine:
    """``state s0.`` lines, then ``trans s0 0 + -> s1 +1 -1.`` lines."""
    states, delta = [], {}
    for no, line in _lines(text):
        m = _STATE.match(line)
        if m:
            if m.group(1) in states:
                raise ParseError(f"duplicate state {m.group(1)}", no, 1)
            states.append(m.group(1))
            continue
        m = _TRANS.match(line)
        if not m:
            raise ParseError(f"cannot parse machine line: {line}", no, 1)
        s, a, b, s2, da, db = m.groups()
        key = (s, a, b)
        if key in delta:
            raise ParseError(f"transition for {key} given twice", no, 1)
        delta[key] = (s2, int(da), int(db))
    try:
        return CounterMachine(states, delta)
    except ValueError as e:
        raise ParseError(str(e), 1, 1) from None


def format_machine(m: CounterMachine) -> str:
    lines = [f"state {s}." for s in m.states]
    for (s, a, b), (s2, da, db) in sorted(m.delta.items()):
        lines.append(f"trans {s} {a} {b} -> {s2} {da:+d} {db:+d}.")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> list:
    """``edge a b.`` lines; node names are lowercase identifiers."""
    edges = []
    for no, line in _lines(text):
        m = _EDGE.match(line)
        if not m:
            raise ParseError(f"cannot parse graph line: {line}", no, 1)
        edges.append((m.group(1), m.group(2)))
    return edges


LOOPING_MACHINE = CounterMachine(["s0"], {("s0", "0", "0"): ("s0", 0, 0)})
