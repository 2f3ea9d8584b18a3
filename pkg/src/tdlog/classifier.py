"""Vertical boundedness, the complexity trichotomy and the datalog/LTL decomposition."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .automata import (DEFAULT_BUDGET, Dfa, _layout, build_accept_dfa,
                       build_expand_nfa, dfa_from_predicate,
                       minimize_dfa)
from .core import (BudgetError, Conj, FragmentError, Program, Rule, TemporalAtom,
                   TemporalDatabase, is_recursive_program)
from .expansions import (Bodies, format_omega, height, in_accept_omega,
                         is_vertical_letter)
from .semantics import TemporalCQ

IN_AC0 = "IN_AC0"
IN_ACC0_NOT_AC0 = "IN_ACC0_NOT_AC0"
NC1_COMPLETE = "NC1_COMPLETE"
L_HARD_IN_NL = "L_HARD_IN_NL"
CLASSES = (IN_AC0, IN_ACC0_NOT_AC0, NC1_COMPLETE, L_HARD_IN_NL)


# ---------------------------------------------------------------- monoids

class FiniteMonoid:
    """Transformation monoid of a DFA; elements are state maps as tuples.

    The product x·y means "apply x, then y"."""

    def __init__(self, d: Dfa, budget: int = DEFAULT_BUDGET):
        n = d.size
        ident = tuple(range(n))
        gens = {}
        for k, a in enumerate(d.alphabet):
            gens[a] = tuple(d.delta[q][k] for q in range(n))
        self.identity = ident
        self.generators = gens
        elems = [ident]
        index = {ident: 0}
        queue = deque([ident])
        distinct = sorted(set(gens.values()))
        while queue:
            x = queue.popleft()
            for g in distinct:
                y = self.mul(x, g)
                if y not in index:
                    index[y] = len(elems)
                    elems.append(y)
                    queue.append(y)
                    if len(elems) > budget:
                        raise BudgetError(f"transition monoid exceeds {budget} elements")
        self.elements = elems
        self.index = index

    @staticmethod
    def mul(x, y):
        return tuple(y[q] for q in x)

    def __len__(self):
        return len(self.elements)

    def closure(self, seeds) -> set:
        """Submonoid generated by seeds."""
        out = {self.identity}
        queue = deque([self.identity])
        seeds = list(set(seeds))
        while queue:
            x = queue.popleft()
            for g in seeds:
                y = self.mul(x, g)
                if y not in out:
                    out.add(y)
                    queue.append(y)
        return out

    def powers(self, x):
        """(index, period, idempotent power) of x."""
        seen = {}
        seq = []
        y = x
        while y not in seen:
            seen[y] = len(seq)
            seq.append(y)
            y = self.mul(y, x)
        start = seen[y]
        period = len(seq) - start
        for z in seq[start:]:
            if self.mul(z, z) == z:
                return start + 1, period, z
        raise AssertionError("cycle without idempotent")

    def idempotents(self) -> list:
        return [x for x in self.elements if self.mul(x, x) == x]

    def maximal_subgroup(self, e) -> list:
        return [x for x in self.elements
                if self.mul(e, x) == x and self.mul(x, e) == x and self.powers(x)[2] == e]


def _subgroup(mon: FiniteMonoid, e, gens) -> set:
    out = {e}
    queue = deque([e])
    gens = list(set(gens))
    while queue:
        x = queue.popleft()
        for g in gens:
            y = mon.mul(x, g)
            if y not in out:
                out.add(y)
                queue.append(y)
    return out


def is_solvable_group(mon: FiniteMonoid, e, group) -> bool:
    """Derived-series test inside a group with identity e."""
    def inverse(x):
        _, period, _ = mon.powers(x)
        y = e
        for _ in range(period - 1):
            y = mon.mul(y, x)
        return y
    cur = set(group)
    while len(cur) > 1:
        inv = {x: inverse(x) for x in cur}
        comms = {mon.mul(mon.mul(inv[a], inv[b]), mon.mul(a, b)) for a in cur for b in cur}
        nxt = _subgroup(mon, e, comms)
        if nxt == cur:
            return False
        cur = nxt
    return True


def is_aperiodic_set(mon: FiniteMonoid, elems) -> bool:
    return all(mon.powers(x)[1] == 1 for x in elems)


def monoid_report(d: Dfa, budget: int = DEFAULT_BUDGET) -> dict:
    # the syntactic monoid is the transition monoid of the minimal DFA
    d = minimize_dfa(d)
    mon = FiniteMonoid(d, budget)
    groups = []
    nonsolvable = False
    seen = set()
    for e in mon.idempotents():
        g = frozenset(mon.maximal_subgroup(e))
        if g in seen:
            continue
        seen.add(g)
        if len(g) > 1:
            ok = is_solvable_group(mon, e, g)
            groups.append((len(g), ok))
            nonsolvable |= not ok
    # images of words of length t, followed until the sequence of sets repeats
    letters = frozenset(mon.generators.values())
    seq, first = [], {}
    cur = letters
    while cur not in first:
        first[cur] = len(seq)
        seq.append(cur)
        cur = frozenset(mon.mul(x, g) for x in cur for g in letters)
    qa_fail = None
    for t, s in enumerate(seq, start=1):
        if not is_aperiodic_set(mon, mon.closure(s)):
            qa_fail = t
            break
    return {"dfa_states": d.size, "monoid_size": len(mon),
            "idempotents": len(mon.idempotents()),
            "nontrivial_groups": sorted(groups), "nonsolvable_group": nonsolvable,
            "quasi_aperiodic": qa_fail is None, "qa_failure_length": qa_fail,
            "image_sequence_length": len(seq)}


def regular_language_class(d: Dfa, budget: int = DEFAULT_BUDGET, report: dict | None = None) -> str:
    rep = report if report is not None else monoid_report(d, budget)
    if rep["nonsolvable_group"]:
        return NC1_COMPLETE
    if rep["quasi_aperiodic"]:
        return IN_AC0
    return IN_ACC0_NOT_AC0


# ---------------------------------------------------------------- witnesses

@dataclass
class PumpWitness:
    xi: tuple
    upsilon: tuple
    zeta: tuple
    gamma: tuple
    checks: dict = field(default_factory=dict)

    def word(self, i: int, with_gamma: bool) -> tuple:
        w = self.xi + self.upsilon * i + self.zeta
        return w + self.gamma if with_gamma else w

    def as_dict(self) -> dict:
        return {"xi": format_omega(self.xi), "upsilon": format_omega(self.upsilon),
                "zeta": format_omega(self.zeta), "gamma": format_omega(self.gamma),
                "checks": self.checks}


def verify_witness(prog: Program, w: PumpWitness, goal: str | None = None,
                   rounds=(0, 1, 2, 3)) -> dict:
    """Re-check the pumping memberships with the direct evaluator."""
    bodies = Bodies(prog, goal)
    out = {"height_upsilon": height(bodies, w.upsilon)}
    for i in rounds:
        out[f"notaccept_{i}"] = not in_accept_omega(prog, w.word(i, False), goal)
        out[f"accept_{i}"] = in_accept_omega(prog, w.word(i, True), goal)
    out["valid"] = out["height_upsilon"] > 0 and all(
        v for k, v in out.items() if k.startswith(("notaccept", "accept")))
    return out


def _sccs(n, succ):
    """Tarjan, iterative; returns component id per node."""
    index = [None] * n
    low = [0] * n
    on = [False] * n
    comp = [None] * n
    stack, counter, ncomp = [], 0, 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            edges = succ[v]
            while i < len(edges):
                w = edges[i][1]
                i += 1
                if index[w] is None:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comp


def _bfs_path(src, targets, succ, allowed=None):
    """Shortest letter path from src to any node in targets."""
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v in targets:
            path = []
            while prev[v] is not None:
                v, a = prev[v]
                path.append(a)
            return tuple(reversed(path))
        for a, w in succ[v]:
            if w not in prev and (allowed is None or w in allowed):
                prev[w] = (v, a)
                queue.append(w)
    return None


def _bfs_path_end(src, targets, succ):
    """Like _bfs_path but also returns the node reached."""
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v in targets:
            end, path = v, []
            while prev[v] is not None:
                v, a = prev[v]
                path.append(a)
            return tuple(reversed(path)), end
        for a, w in succ[v]:
            if w not in prev:
                prev[w] = (v, a)
                queue.append(w)
    return None


def _bfs_reach(starts, succ) -> set:
    seen = set(starts)
    queue = deque(starts)
    while queue:
        v = queue.popleft()
        for _, w in succ[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


@dataclass
class BoundednessResult:
    bounded: bool
    witness: PumpWitness | None
    accept: Dfa
    product_states: int
    expand_states: int

    @property
    def height_bound(self) -> int:
        return self.product_states + 1


def vertical_boundedness(prog: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET,
                         accept: Dfa | None = None) -> BoundednessResult:
    """Search the product of NotAccept and Expand for a pumpable vertical cycle.

    NotAccept is the complement of the (deterministic) Accept automaton, so
    the product is an NFA whose states pair an Accept state with an
    Expand state."""
    bodies = Bodies(prog, goal)
    acc = accept or build_accept_dfa(prog, goal, budget)
    exp = build_expand_nfa(prog, goal, budget)
    letters = acc.alphabet
    vert = [is_vertical_letter(bodies, a) for a in letters]
    ids, nodes, succ = {}, [], []

    def node(x):
        i = ids.get(x)
        if i is None:
            i = ids[x] = len(nodes)
            nodes.append(x)
            succ.append(None)
            if len(nodes) > budget:
                raise BudgetError(f"boundedness product exceeds {budget} states")
        return i
    starts = [node((acc.start, q)) for q in sorted(exp.initial, key=repr)]
    i = 0
    while i < len(nodes):
        dq, nq = nodes[i]
        out = []
        for k, a in enumerate(letters):
            d2 = acc.delta[dq][k]
            for n2 in sorted(exp.successors(nq, a), key=repr):
                out.append((k, node((d2, n2))))
        succ[i] = out
        i += 1
    n = len(nodes)
    comp = _sccs(n, succ)
    pump = {}
    for v in range(n):
        for k, w in succ[v]:
            if vert[k] and comp[v] == comp[w]:
                pump.setdefault(comp[v], (v, k, w))
    after_pump = _bfs_reach([e[2] for e in pump.values()], succ)
    # nodes from which an Expand-accepting node can be reached
    pred = [[] for _ in range(n)]
    for v in range(n):
        for k, w in succ[v]:
            pred[w].append((k, v))
    finals = [v for v in range(n) if exp.is_accepting(nodes[v][1])]
    coreach = _bfs_reach(finals, pred)
    cands = set()
    for v in after_pump:
        if nodes[v][0] in acc.accepting:
            continue
        if any(vert[k] and w in coreach for k, w in succ[v]):
            cands.add(v)
    result = BoundednessResult(not cands, None, acc, n, len(exp.states))
    if not cands:
        return result
    # witness: cut the pumping cycle right after its vertical edge
    best = None
    for c, (u, k, v) in sorted(pump.items(), key=lambda kv: kv[1]):
        members = {x for x in range(n) if comp[x] == c}
        to_u = _bfs_path(min(starts), {u}, succ)
        if to_u is None:
            continue
        back = _bfs_path(v, {u}, succ, members)
        found = _bfs_path_end(v, cands, succ)
        if back is None or found is None:
            continue
        zeta, q = found
        best = (to_u + (k,), back + (k,), v, zeta, q)
        break
    assert best is not None, "candidate without a reachable pumping cycle"
    xi, ups, v, zeta, q = best
    gamma = None
    for k, w in succ[q]:
        if vert[k] and w in coreach:
            tail = _bfs_path(w, set(finals), succ)
            if tail is not None:
                gamma = (k,) + tail
                break
    assert gamma is not None

    def word(ks):
        return tuple(letters[k] for k in ks)
    wit = PumpWitness(word(xi), word(ups), word(zeta), word(gamma))
    wit.checks = verify_witness(prog, wit, goal)
    result.witness = wit
    return result


# ---------------------------------------------------------------- verdicts

@dataclass
class ComplexityVerdict:
    cls: str
    vertically_bounded: bool
    evidence: dict
    automata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"class": self.cls, "vertically_bounded": self.vertically_bounded,
                "evidence": self.evidence, "automata": self.automata}


def _check_query(prog: Program, goal):
    goal = goal or prog.goal
    if goal is None:
        raise ValueError("no goal predicate given")
    if not prog.monadic:
        raise FragmentError("only monadic programs are classified")
    for info in prog.infos:
        if not info.connected:
            raise FragmentError(f"rule {info.index + 1} is disconnected: {prog.rules[info.index]}")
    return goal


def classify(prog: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET) -> ComplexityVerdict:
    goal = _check_query(prog, goal)
    if not prog.next_only:
        if is_recursive_program(prog):
            raise FragmentError("recursive programs with sometime operators are undecidable "
                                "to classify; only non-recursive ones are unfolded")
        cqs = unfold(prog, goal)
        return ComplexityVerdict(IN_AC0, True, {"unfolded_queries": len(cqs),
                                                "reason": "non-recursive: finite union of temporal CQs"})
    if not prog.linear:
        raise FragmentError("classification needs a linear program")
    res = vertical_boundedness(prog, goal, budget)
    autom = {"accept_states": res.accept.size, "product_states": res.product_states,
             "expand_states": res.expand_states}
    if not res.bounded:
        return ComplexityVerdict(L_HARD_IN_NL, False, {"pump": res.witness.as_dict()}, autom)
    rep = monoid_report(res.accept, budget)
    ev = dict(rep)
    ev["height_bound"] = res.height_bound
    return ComplexityVerdict(regular_language_class(res.accept, budget, rep), True, ev, autom)


# ---------------------------------------------------------------- unfolding

def unfold(prog: Program, goal: str | None = None, limit: int = 10000) -> list:
    """Non-recursive program -> list of temporal CQs whose union is the goal."""
    goal = goal or prog.goal
    if is_recursive_program(prog):
        raise FragmentError("only non-recursive programs can be unfolded")
    by_head: dict = {}
    for r in prog.rules:
        by_head.setdefault(r.head_pred, []).append(r)
    counter = itertools.count(1)

    def expand_formula(f):
        """All ways to replace IDB leaves of f; yields formulas."""
        if isinstance(f, TemporalAtom):
            if f.pred not in prog.idb:
                yield f
                return
            for r in by_head.get(f.pred, ()):
                tag = next(counter)
                sub = {v: f"{v}_{tag}" for v in r.variables}
                sub.update(dict(zip(r.head_args, f.args)))
                body = tuple(_rename(g, sub) for g in r.body)
                for parts in itertools.product(*(list(expand_formula(g)) for g in body)):
                    yield Conj(tuple(parts), f.prefix) if (f.prefix or len(parts) > 1) \
                        else parts[0]
            return
        for parts in itertools.product(*(list(expand_formula(g)) for g in f.parts)):
            yield Conj(tuple(parts), f.prefix)
    head = TemporalAtom(goal, ("X",))
    out = []
    for f in expand_formula(head):
        body = f.parts if isinstance(f, Conj) and not f.prefix else (f,)
        out.append(TemporalCQ(("X",), tuple(body)))
        if len(out) > limit:
            raise BudgetError("unfolding too large")
    return out


def _rename(f, sub):
    if isinstance(f, TemporalAtom):
        return f.renamed(sub)
    return Conj(tuple(_rename(g, sub) for g in f.parts), f.prefix)


# ---------------------------------------------------------------- decomposition

TRUE_PRED = "Adom"
END_PRED = "End"
HOR_PRED = "Hor"


def letter_names(d: Dfa) -> list:
    return [f"L{i}" for i in range(len(d.alphabet))]


def decompose(prog: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET,
              accept: Dfa | None = None):
    """(plain datalog program, plain LTL program) simulating the Accept DFA.

    Letters become EDB predicates L0, L1, ... in alphabet order; state i
    becomes IDB S{i}."""
    goal = goal or prog.goal
    bodies = Bodies(prog, goal)
    acc = accept or build_accept_dfa(prog, goal, budget)
    names = letter_names(acc)
    n = acc.size

    # states that cannot reach acceptance get no predicate
    back = [[] for _ in range(n)]
    for q in range(n):
        for k in range(len(names)):
            back[acc.delta[q][k]].append((k, q))
    live = _bfs_reach(sorted(acc.accepting), back)

    def S(i, v="X"):
        return TemporalAtom(f"S{i}", (v,))
    X = ("X",)
    # temporal program
    rt = [Rule(goal, X, (S(acc.start),))]
    for i in sorted(live):
        for k, name in enumerate(names):
            j = acc.delta[i][k]
            if j in live:
                rt.append(Rule(f"S{i}", X, (TemporalAtom(name, X), TemporalAtom(f"S{j}", X, (1,)))))
    for i in sorted(acc.accepting):
        rt.append(Rule(f"S{i}", X, (TemporalAtom(END_PRED, X),)))
    for i in sorted(live):
        for a, b in itertools.combinations(names, 2):
            rt.append(Rule(f"S{i}", X, (TemporalAtom(a, X), TemporalAtom(b, X))))
    pi_t = Program(tuple(rt), goal)
    # datalog program
    vert = [is_vertical_letter(bodies, a) for a in acc.alphabet]
    rd = [Rule(goal, X, (S(acc.start),))]
    for i in sorted(live):
        for k, name in enumerate(names):
            if vert[k] and acc.delta[i][k] in live:
                rd.append(Rule(f"S{i}", X, (TemporalAtom(name, ("X", "Y")), S(acc.delta[i][k], "Y"))))
    for i in sorted(acc.accepting):
        rd.append(Rule(f"S{i}", X, (TemporalAtom(TRUE_PRED, X),)))
    flat = [[(k, acc.delta[q][k]) for k in range(len(names)) if not vert[k]] for q in range(n)]
    for i in sorted(live):
        for j in sorted((_bfs_reach([i], flat) & live) - {i}):
            rd.append(Rule(f"S{i}", X, (TemporalAtom(HOR_PRED, X), S(j))))
    pi_d = Program(tuple(rd), goal)
    return pi_d, pi_t


def chain_boundedness(pi_d: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET) -> bool:
    """Boundedness of a plain datalog program of the decomposition's shape.

    Rules are ``S(X) <- Adom(X)``, ``S(X) <- S'(X)``, ``S(X) <- M(X), S'(X)``
    with M a unary EDB, and ``S(X) <- L(X,Y), S'(Y)``.  Databases that matter
    are paths whose nodes carry sets of unary markers.  The program is
    bounded iff the paths accepted with no accepted proper prefix have
    bounded length; that is a cycle test on the subset automaton."""
    goal = goal or pi_d.goal
    edges, eps, final = {}, {}, set()
    labels, markers = set(), set()
    for r in pi_d.rules:
        h = r.head_pred
        atoms = list(r.body)
        if len(atoms) == 1 and atoms[0].pred == TRUE_PRED:
            final.add(h)
        elif len(atoms) == 1 and atoms[0].args == r.head_args:
            eps.setdefault(h, []).append((None, atoms[0].pred))
        elif (len(atoms) == 2 and all(a.args == r.head_args for a in atoms)
              and atoms[0].pred not in pi_d.idb):
            eps.setdefault(h, []).append((atoms[0].pred, atoms[1].pred))
            markers.add(atoms[0].pred)
        elif len(atoms) == 2 and len(atoms[0].args) == 2 and len(atoms[1].args) == 1:
            edges.setdefault(h, []).append((atoms[0].pred, atoms[1].pred))
            labels.add(atoms[0].pred)
        else:
            raise FragmentError(f"unexpected rule shape: {r}")
    marks = sorted(markers)
    node_sets = [frozenset(c) for n in range(len(marks) + 1) for c in itertools.combinations(marks, n)]

    def close(s, here):
        out = set(s)
        stack = list(s)
        while stack:
            p = stack.pop()
            for guard, q in eps.get(p, ()):
                if (guard is None or guard in here) and q not in out:
                    out.add(q)
                    stack.append(q)
        return frozenset(out)
    alpha = [("root", m) for m in node_sets] + [(lab, m) for lab in sorted(labels) for m in node_sets]
    PRE, DONE = ("pre",), ("done",)

    def step(s, a):
        lab, here = a
        if s == PRE:
            return close({goal}, here) if lab == "root" else frozenset()
        if s == DONE or s & final:
            return DONE
        if lab == "root":
            return frozenset()
        return close({q for p in s for l2, q in edges.get(p, ()) if l2 == lab}, here)

    def accepting(s):
        return isinstance(s, frozenset) and bool(s & final)
    d = dfa_from_predicate(alpha, step, PRE, accepting, budget)
    n = d.size
    succ = [[(k, d.delta[q][k]) for k in range(len(alpha))] for q in range(n)]
    pred = [[] for _ in range(n)]
    for q in range(n):
        for k, w in succ[q]:
            pred[w].append((k, q))
    live = _bfs_reach([d.start], succ) & _bfs_reach(list(d.accepting), pred)
    live -= set(d.accepting)
    comp = _sccs(n, [[(k, w) for k, w in succ[q] if q in live and w in live] for q in range(n)])
    sizes: dict = {}
    for q in live:
        sizes[comp[q]] = sizes.get(comp[q], 0) + 1
    return not any(sizes[comp[q]] > 1 or any(w == q for _, w in succ[q]) for q in live)


def ltl_language_dfa(prog: Program, goal: str | None = None, letters=None,
                     budget: int = DEFAULT_BUDGET) -> Dfa:
    """DFA for the reversed timeline language of a single-object future-only program.

    A word over ``letters`` (sets of unary EDB predicates) is accepted iff
    the goal holds at its first position when read as a timeline.  Reading
    right to left, the IDB set at a position depends only on its letter
    and the next K positions.  Reversal preserves the circuit class."""
    goal = goal or prog.goal
    K = 0
    for r in prog.rules:
        for a in r.body:
            if a.offset is None or a.offset < 0 or len(a.args) != 1 or a.args != r.head_args:
                raise FragmentError("expected a single-object future-only program")
            K = max(K, a.offset)
    edb = sorted(prog.edb)
    if letters is None:
        if len(edb) > 10:
            raise BudgetError("give explicit letter classes for large EDB schemas")
        letters = [frozenset(c) for n in range(len(edb) + 1) for c in itertools.combinations(edb, n)]
    letters = tuple(letters)

    def slice_of(letter, ahead_edb, ahead):
        """IDB set at a position: least fixpoint given its letter and the next K slices."""
        cur = set()
        while True:
            new = set(cur)
            for r in prog.rules:
                ok = True
                for a in r.body:
                    if a.pred in prog.idb:
                        have = cur if a.offset == 0 else ahead[a.offset - 1]
                    else:
                        have = letter if a.offset == 0 else ahead_edb[a.offset - 1]
                    if a.pred not in have:
                        ok = False
                        break
                if ok:
                    new.add(r.head_pred)
            if new == cur:
                return frozenset(cur)
            cur = new
    # far to the right every position is empty; iterate to the stable suffix
    blank = (frozenset(),) * K
    state = blank
    for _ in range(2 ** (len(prog.idb) + 1) * max(K, 1) + 2):
        s = slice_of(frozenset(), blank, state)
        nxt = (s,) + state[:-1] if K else ()
        if nxt == state:
            break
        state = nxt
    start = (blank, state, None)

    def step(q, a):
        edbs, idbs, _ = q
        s = slice_of(a, edbs, idbs)
        if K:
            return ((a,) + edbs[:-1], (s,) + idbs[:-1], s)
        return ((), (), s)

    def accepting(q):
        return q[2] is not None and goal in q[2]
    return minimize_dfa(dfa_from_predicate(letters, step, start, accepting, budget))


def pi_t_letters(pi_t: Program) -> list:
    """Letter classes of the temporal program: every other subset acts like one of these."""
    names = sorted(p for p in pi_t.edb if p != END_PRED)
    out = [frozenset(), frozenset({END_PRED})]
    for a in names:
        out += [frozenset({a}), frozenset({a, END_PRED})]
    if len(names) >= 2:
        out.append(frozenset(names[:2]))
    return out


# ---------------------------------------------------------------- reachability gadget

def _word_facts(bodies, idb, word):
    """EDB facts of the word's database with variable names, plus (Y, time) of the pending IDB atom."""
    facts = []
    last = None
    for pos, b, sub, t in _layout(bodies, word):
        own = bodies.idb_atom[b]
        for a in bodies.rule(b).body:
            if a.pred not in idb:
                facts.append((a.pred, tuple(sub[v] for v in a.args), t + a.offset))
        if bodies.kind[b] == "vertical":
            last = (sub[own.args[0]], t + own.offset)
    return facts, last


def build_reachability_gadget(prog: Program, witness: PumpWitness, graph, s, p,
                              goal: str | None = None):
    """Layered database for the graph; returns (database, answer object).

    ``graph`` is an iterable of undirected edges; self-loops are added.
    The goal holds at (answer, 0) iff s and p are connected."""
    bodies = Bodies(prog, goal)
    if not witness.checks.get("valid", True):
        raise ValueError("invalid pump witness")
    nodes = sorted({s, p} | {x for e in graph for x in e}, key=str)
    edges = {(u, v) for u, v in graph} | {(v, u) for u, v in graph} | {(v, v) for v in nodes}
    m = len(nodes)
    ufacts, (uy, uell) = _word_facts(bodies, prog.idb, witness.upsilon)
    zfacts, _ = _word_facts(bodies, prog.idb, witness.zeta + witness.gamma)
    facts = set()
    copies = itertools.count()

    def add(src, glue, shift):
        tag = next(copies)
        for pred, args, t in src:
            facts.add((pred, tuple(glue.get(x, f"c{tag}_{x}") for x in args), t + shift))

    def obj(v, i):
        return f"{v}_{i}"
    if witness.xi:
        xfacts, (xy, xell) = _word_facts(bodies, prog.idb, witness.xi)
        root = "root"
        add(xfacts, {"X": root, xy: obj(s, 0)}, 0)
    else:
        xell, root = 0, obj(s, 0)
    layer = [xell + i * uell for i in range(m)]
    for i in range(m - 1):
        for u, v in sorted(edges, key=str):
            add(ufacts, {"X": obj(u, i), uy: obj(v, i + 1)}, layer[i])
    add(zfacts, {"X": obj(p, m - 1)}, layer[m - 1])
    return TemporalDatabase.from_facts(facts), root
