"""Finite automata over Ω and the three word languages of a query.

* a small NFA/DFA toolkit (lazy NFAs, subset construction, products,
  complement, minimisation, dump format);
* the two-way automaton for Expand and its one-way conversion by
  crossing sequences;
* the NotAccept NFA, which guesses IDB content on a sliding window of
  D_α and checks it against the rules;
* the Accept DFA (determinised NotAccept, complemented, intersected with
  the correctness checker).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .core import BudgetError, FragmentError, Program
from .expansions import (Bodies, Letter, _fresh_body, alphabet, correctness_violation,
                         is_correct, is_vertical_letter, letter_ok, segments)
from .semantics import solve

DEFAULT_BUDGET = 200_000


# ---------------------------------------------------------------- toolkit

class Nfa:
    """Nondeterministic automaton with transitions computed on demand."""

    def __init__(self, initial, step, accepting, alphabet=None, budget=DEFAULT_BUDGET, name="nfa"):
        self.initial = frozenset(initial)
        self._step = step
        self._accepting = accepting
        self.alphabet = list(alphabet) if alphabet is not None else None
        self.budget = budget
        self.name = name
        self._succ: dict = {}
        self._acc: dict = {}
        self.states: set = set(self.initial)

    def successors(self, q, a) -> frozenset:
        key = (q, a)
        res = self._succ.get(key)
        if res is None:
            res = frozenset(self._step(q, a))
            self._succ[key] = res
            self.states |= res
            if len(self.states) > self.budget:
                raise BudgetError(f"{self.name}: more than {self.budget} states")
        return res

    def is_accepting(self, q) -> bool:
        res = self._acc.get(q)
        if res is None:
            res = self._acc[q] = bool(self._accepting(q))
        return res

    def run(self, word) -> frozenset:
        cur = self.initial
        for a in word:
            cur = frozenset(s for q in cur for s in self.successors(q, a))
            if not cur:
                break
        return cur

    def accepts(self, word) -> bool:
        return any(self.is_accepting(q) for q in self.run(word))


@dataclass
class Dfa:
    """Complete DFA over an explicit alphabet; states are 0..n-1."""
    alphabet: tuple
    delta: list
    start: int
    accepting: frozenset
    labels: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.delta)

    def index(self, a) -> int:
        idx = getattr(self, "_index", None)
        if idx is None:
            idx = self._index = {x: i for i, x in enumerate(self.alphabet)}
        return idx[a]

    def run(self, word, state=None) -> int:
        q = self.start if state is None else state
        for a in word:
            q = self.delta[q][self.index(a)]
        return q

    def accepts(self, word) -> bool:
        return self.run(word) in self.accepting


def determinize(nfa: Nfa, alphabet, budget: int = DEFAULT_BUDGET) -> Dfa:
    """Subset construction restricted to reachable subsets."""
    alphabet = tuple(alphabet)
    start = nfa.initial
    ids = {start: 0}
    order = [start]
    delta: list = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for a in alphabet:
            nxt = frozenset(s for q in cur for s in nfa.successors(q, a))
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(order)
                order.append(nxt)
                if len(order) > budget:
                    raise BudgetError(f"subset construction exceeded {budget} states")
            row.append(j)
        delta.append(tuple(row))
        i += 1
    acc = frozenset(k for k, s in enumerate(order) if any(nfa.is_accepting(q) for q in s))
    return Dfa(alphabet, delta, 0, acc, order)


def complement_dfa(d: Dfa) -> Dfa:
    return Dfa(d.alphabet, d.delta, d.start, frozenset(range(d.size)) - d.accepting, d.labels)


def product(a: Dfa, b: Dfa, mode: str = "and") -> Dfa:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabets differ")
    ids = {(a.start, b.start): 0}
    order = [(a.start, b.start)]
    delta = []
    i = 0
    while i < len(order):
        p, q = order[i]
        row = []
        for k in range(len(a.alphabet)):
            nxt = (a.delta[p][k], b.delta[q][k])
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(order)
                order.append(nxt)
            row.append(j)
        delta.append(tuple(row))
        i += 1
    op = {"and": lambda x, y: x and y, "or": lambda x, y: x or y,
          "diff": lambda x, y: x and not y}[mode]
    acc = frozenset(k for k, (p, q) in enumerate(order) if op(p in a.accepting, q in b.accepting))
    return Dfa(a.alphabet, delta, 0, acc, order)


def reachable_states(d: Dfa) -> set:
    seen = {d.start}
    stack = [d.start]
    while stack:
        q = stack.pop()
        for r in d.delta[q]:
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return seen


def is_empty(d: Dfa) -> bool:
    return not (reachable_states(d) & d.accepting)


def minimize_dfa(d: Dfa) -> Dfa:
    """Moore-style partition refinement on the reachable part."""
    reach = sorted(reachable_states(d))
    block = {q: (q in d.accepting) for q in reach}
    n_blocks = len(set(block.values()))
    while True:
        sig = {q: (block[q],) + tuple(block[d.delta[q][k]] for k in range(len(d.alphabet)))
               for q in reach}
        names: dict = {}
        for q in reach:
            names.setdefault(sig[q], len(names))
        new = {q: names[sig[q]] for q in reach}
        if len(names) == n_blocks:
            block = new
            break
        block, n_blocks = new, len(names)
    # renumber so the start state is 0 and numbering follows BFS order
    order, ids = [], {}
    queue = deque([block[d.start]])
    rep = {}
    for q in reach:
        rep.setdefault(block[q], q)
    ids[block[d.start]] = 0
    order.append(block[d.start])
    while queue:
        b = queue.popleft()
        for k in range(len(d.alphabet)):
            c = block[d.delta[rep[b]][k]]
            if c not in ids:
                ids[c] = len(order)
                order.append(c)
                queue.append(c)
    delta = [tuple(ids[block[d.delta[rep[b]][k]]] for k in range(len(d.alphabet))) for b in order]
    acc = frozenset(ids[block[q]] for q in reach if q in d.accepting)
    return Dfa(d.alphabet, delta, 0, acc)


def dfa_from_predicate(alphabet, step, start, accepting, budget=DEFAULT_BUDGET) -> Dfa:
    """Materialise a deterministic automaton given as a step function."""
    alphabet = tuple(alphabet)
    ids = {start: 0}
    order = [start]
    delta = []
    i = 0
    while i < len(order):
        row = []
        for a in alphabet:
            nxt = step(order[i], a)
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(order)
                order.append(nxt)
                if len(order) > budget:
                    raise BudgetError("materialisation budget exceeded")
            row.append(j)
        delta.append(tuple(row))
        i += 1
    acc = frozenset(k for k, s in enumerate(order) if accepting(s))
    return Dfa(alphabet, delta, 0, acc, order)


def letter_key(a) -> str:
    return str(a)


def dump_automaton(d: Dfa, name: str = "A") -> tuple:
    """(adjacency text, letter dictionary text) in the documented dump format."""
    import hashlib
    keys = [hashlib.sha1(letter_key(a).encode()).hexdigest()[:8] for a in d.alphabet]
    lines = [f"# automaton {name}: {d.size} states, start {d.start}",
             "accepting " + " ".join(map(str, sorted(d.accepting)))]
    for q, row in enumerate(d.delta):
        lines.append(f"{q}: " + " ".join(f"{keys[k]}->{r}" for k, r in enumerate(row)))
    letters = "\n".join(f"{k} {letter_key(a)}" for k, a in zip(keys, d.alphabet))
    return "\n".join(lines) + "\n", letters + "\n"


# ---------------------------------------------------------------- correctness checker

def _corr_step(bodies: Bodies, s, a):
    if s == "dead" or not letter_ok(bodies, a):
        return "dead"
    seg, bots, tops = s
    if is_vertical_letter(bodies, a):
        if seg == "h" and (bots != 1 or tops != 1):
            return "dead"
        return ("v", 0, 0)
    if seg != "h":
        bots = tops = 0
    bots = min(2, bots + a.bot)
    tops = min(2, tops + a.top)
    if bots > 1:
        return "dead"
    return ("h", bots, tops)


def _corr_accepting(s) -> bool:
    return s != "dead" and (s[0] != "h" or s[1] == 1)


CORRECT_START = ("-", 0, 0)


def correctness_dfa(bodies: Bodies, alpha=None) -> Dfa:
    """Constant-size DFA for the correct words (the empty word included)."""
    alpha = alpha or alphabet(bodies)
    return dfa_from_predicate(alpha, lambda s, a: _corr_step(bodies, s, a),
                              CORRECT_START, _corr_accepting)


# ---------------------------------------------------------------- Expand: two-way automaton

LEFT_END = "|-"
RIGHT_END = "-|"
ACC = ("accept",)


@dataclass
class TwoWayNfa:
    """Two-way automaton; delta(state, symbol) gives (state, move) pairs
    with move in {-1, 0, +1}, or ACC to accept on the spot."""
    states: list
    start: object
    delta: object
    left_states: frozenset

    def closure_moves(self, q, sym) -> frozenset:
        """Moves after following stay-transitions: pairs (state, ±1) or ACC."""
        out = set()
        seen = {q}
        stack = [q]
        while stack:
            s = stack.pop()
            for item in self.delta(s, sym):
                if item == ACC:
                    out.add(ACC)
                    continue
                t, mv = item
                if mv == 0:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
                else:
                    out.add((t, mv))
        return frozenset(out)

    def accepts(self, word) -> bool:
        """Direct configuration search (independent of the one-way conversion)."""
        tape = [LEFT_END] + list(word) + [RIGHT_END]
        start = (self.start, 0)
        seen = {start}
        stack = [start]
        while stack:
            q, p = stack.pop()
            for item in self.delta(q, tape[p]):
                if item == ACC:
                    return True
                t, mv = item
                np_ = p + mv
                if 0 <= np_ < len(tape) and (t, np_) not in seen:
                    seen.add((t, np_))
                    stack.append((t, np_))
        return False


def build_expand_2nfa(prog: Program, goal: str | None = None) -> TwoWayNfa:
    """Two-way automaton walking an expansion over an Ω-word.

    States are (IDB, mode) pairs.  Modes: ``n`` (apply a body at this
    letter), ``n0`` (same, but no body applied yet in this horizontal
    segment, so ⊤ cannot be used to leave it), ``enter`` (just arrived after a vertical body), ``bot``
    (seek the ⊥ letter), ``vert`` (seek the next vertical letter after
    ⊤), ``("mv", r, d)`` (r more unit steps in direction d), ``fin``
    (walk to the right end marker), ``start``.
    """
    bodies = Bodies(prog, goal)
    bodies.check_next_only()
    if not prog.connected:
        raise FragmentError("analysis needs a connected program")
    idbs = sorted(prog.idb)
    kmax = max([abs(bodies.offset(b)) for b in bodies.horizontal] + [1])
    modes = ["n", "n0", "enter", "bot", "vert"]
    modes += [("mv", r, d) for r in range(kmax) for d in (1, -1)]
    states = [(p, m) for p in idbs for m in modes] + [("*", "fin"), (bodies.goal, "start")]
    left = frozenset((p, ("mv", r, -1)) for p in idbs for r in range(kmax))

    def horizontal_sym(sym):
        return isinstance(sym, Letter) and not is_vertical_letter(bodies, sym)

    def delta(state, sym):
        pred, mode = state
        out = []
        if mode == "start":
            if sym == LEFT_END:
                out.append(((pred, "enter"), 1))
            return out
        if mode == "fin":
            if sym == RIGHT_END:
                out.append(ACC)
            elif horizontal_sym(sym):
                out.append((state, 1))
            return out
        if sym in (LEFT_END, RIGHT_END):
            return out
        vertical = is_vertical_letter(bodies, sym)
        if mode == "enter":
            out.append(((pred, "n" if vertical else "bot"), 0))
        elif mode == "bot":
            if not vertical:
                out.append(((pred, "n0"), 0) if sym.bot else (state, 1))
        elif mode == "vert":
            out.append(((pred, "n"), 0) if vertical else (state, 1))
        elif isinstance(mode, tuple):
            _, r, d = mode
            if not vertical:
                out.append(((pred, "n"), 0) if r == 0 else ((pred, ("mv", r - 1, d)), d))
        elif mode in ("n", "n0"):
            for b in sorted(sym.bodies):
                if bodies.head(b) != pred:
                    continue
                kind = bodies.kind[b]
                atom = bodies.idb_atom[b]
                if kind == "vertical" and vertical:
                    out.append(((atom.pred, "enter"), 1))
                elif kind == "initialization" and not vertical:
                    if sym.top:
                        out.append((("*", "fin"), 1))
                elif kind == "horizontal" and not vertical:
                    k = bodies.offset(b)
                    if k == 0:
                        out.append(((atom.pred, "n"), 0))
                    else:
                        d = 1 if k > 0 else -1
                        out.append(((atom.pred, ("mv", abs(k) - 1, d)), d))
            if not vertical and sym.top and mode == "n":
                out.append(((pred, "vert"), 1))
        return out

    return TwoWayNfa(states, (bodies.goal, "start"), delta, left)


def two_way_to_one_way(tw: TwoWayNfa, alphabet=None, budget: int = DEFAULT_BUDGET) -> Nfa:
    """One-way NFA whose states are crossing sequences of the two-way automaton.

    Crossing sequences never repeat a (state, direction) pair, so their
    length is at most 2|S|.
    """
    cap = 2 * len(tw.states)
    moves_cache: dict = {}

    def moves(q, sym):
        key = (q, sym)
        r = moves_cache.get(key)
        if r is None:
            r = moves_cache[key] = tw.closure_moves(q, sym)
        return r

    def extend(L, sym, last: bool):
        """All R consistent with L at a cell holding sym (L None at the left end)."""
        results = set()

        def ok_append(R, q):
            parity = len(R) % 2
            return len(R) < cap and all(R[i] != q for i in range(parity, len(R), 2))

        def enter(iL, R, q, from_right):
            for mv in moves(q, sym):
                if mv == ACC:
                    if last and (L is None or iL == len(L)):
                        results.add(R)
                    continue
                t, d = mv
                if d == 1:
                    if last or not ok_append(R, t):
                        continue
                    R2 = R + (t,)
                    if L is None or iL == len(L):
                        results.add(R2)
                    for g in tw.left_states:
                        if ok_append(R2, g):
                            enter(iL, R2 + (g,), g, True)
                else:
                    if L is None or iL >= len(L) or L[iL] != t:
                        continue
                    iL2 = iL + 1
                    if iL2 < len(L):
                        enter(iL2 + 1, R, L[iL2], False)

        if L is None:
            enter(0, (), tw.start, False)
        elif L:
            enter(1, (), L[0], False)
        return results

    memo: dict = {}

    def step(L, a):
        key = (L, a)
        if key not in memo:
            memo[key] = extend(L, a, False)
        return memo[key]

    def accepting(L):
        return () in extend(L, RIGHT_END, True)

    initial = extend(None, LEFT_END, False)
    return Nfa(initial, step, accepting, alphabet, budget, name="expand")


# ---------------------------------------------------------------- NotAccept

class _Shape:
    """Static quantities of a program used by the window construction."""

    def __init__(self, prog: Program, goal: str | None = None):
        bodies = Bodies(prog, goal)
        bodies.check_next_only()
        if not prog.connected:
            raise FragmentError("analysis needs a connected program")
        self.prog = prog
        self.bodies = bodies
        self.goal = bodies.goal
        self.idb = tuple(sorted(prog.idb))
        span = place = kpure = 0
        diam = 1
        self.rules = []
        self.pure = []
        for r in prog.rules:
            atoms = []
            for a in r.body:
                if a.offset is None:
                    raise FragmentError("sometime operator in a rule body")
                if a.pred not in prog.idb and not a.args:
                    raise FragmentError("propositional EDB atoms are not supported here")
                atoms.append((a.pred, a.args, a.offset, a.pred in prog.idb))
            offs = [0] + [a[2] for a in atoms]
            span = max(span, max(offs) - min(offs))
            edb = [a for a in atoms if not a[3]]
            idb = [a for a in atoms if a[3]]
            k = idb[0][2] if idb else 0
            vertical = bool(idb) and idb[0][1][0] != r.head_args[0]
            for a in edb:
                place = max(place, abs(a[2]), abs(a[2] - k) if vertical else 0)
            if not edb and idb:
                self.pure.append((r.head_pred, idb[0][0], k))
                kpure = max(kpure, abs(k))
            diam = max(diam, _diameter(r))
            self.rules.append((r.head_pred, r.head_args[0], atoms))
        self.span, self.place, self.k, self.diam = span, place, kpure, diam
        self.margin = span
        self.reach = place + span
        self.excursion = (4 * kpure * kpure * len(self.idb) + 4 * kpure + 2) if kpure else 0
        self.subsets = [frozenset(c) for n in range(len(self.idb) + 1)
                        for c in itertools.combinations(self.idb, n)]


def _diameter(rule) -> int:
    adj: dict = {}
    for a in rule.body:
        for v in a.args:
            adj.setdefault(v, set()).update(a.args)
    best = 0
    for v in adj:
        dist = {v: 0}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        best = max(best, max(dist.values()))
    return best


class _WS:
    """Mutable window over D_α.

    ``cells`` maps tracked (object, time) pairs to a payload (the guessed
    IDB set in the guessing automaton, empty in the summary automaton);
    ``reach`` and ``summ`` are the summary automaton's configuration sets.
    """
    __slots__ = ("chain", "kind", "frame", "segobj", "cells", "atoms",
                 "pending", "seg", "root", "nid", "reach", "summ", "fresh", "touched")

    def copy(self):
        w = _WS()
        w.chain = list(self.chain)
        w.kind = dict(self.kind)
        w.frame = dict(self.frame)
        w.segobj = set(self.segobj)
        w.cells = dict(self.cells)
        w.atoms = set(self.atoms)
        w.pending = self.pending
        w.seg = list(self.seg) if self.seg else None
        w.root = self.root
        w.nid = self.nid
        w.reach = set(self.reach)
        w.summ = set(self.summ)
        w.fresh = list(self.fresh)
        w.touched = set(self.touched)
        return w

    def new_obj(self, kind, frame):
        o = self.nid
        self.nid += 1
        self.kind[o] = kind
        self.frame[o] = frame
        if kind == "l":
            self.fresh.append(o)
        return o


EMPTY_WINDOW = ((), (), (), (), None, None, None, (), ())
# sentinel configuration: "a derivation has been completed"
FIN = ("#fin", -1, 0)


def _live(ws, c) -> bool:
    return c == FIN or (c[1] in ws.kind and (c[1], c[2]) in ws.cells)


class _WindowMachine:
    """Reading Ω-words left to right while keeping a bounded window of D_α.

    Horizontal segments are laid out on a local time axis until their ⊥
    letter fixes where the preceding vertical body attaches, at which
    point the two frames are merged.  Cells further than a match span
    from anything that can still arrive are forgotten, and only the last
    few chain objects are kept.
    """

    freeze = False

    def __init__(self, prog: Program, goal: str | None = None):
        self.shape = _Shape(prog, goal)
        self.bodies = self.shape.bodies
        r = self.shape.reach
        # cell ranges, relative to the next letter's time and to the ⊤ time,
        # that later atoms can still touch
        self.ahead = (-r, r)
        self.attach = (-r, r)

    # --------------------------------------------------------- encoding
    def _refs(self, ws):
        ref = {0: 0, 1: 0}
        if ws.seg:
            ref[ws.frame[ws.chain[-1]]] = ws.seg[0]
        if ws.pending:
            f = ws.frame[ws.pending[1]]
            if not ws.seg or ws.frame[ws.chain[-1]] != f:
                ref[f] = ws.pending[2]
        return ref

    def _encode(self, ws):
        ref = self._refs(ws)
        ids = {o: i for i, o in enumerate(ws.chain)}
        locs = [o for o in ws.kind if ws.kind[o] == "l"]
        by_obj: dict = {}
        for at in ws.atoms:
            for x in set(at[1]):
                by_obj.setdefault(x, []).append(at)

        def rel(o, t):
            return t - ref[ws.frame[o]]

        def sig(u):
            ats = sorted((p, tuple(-1 if x == u else ids.get(x, -2) for x in args), rel(u, t))
                         for p, args, t in by_obj.get(u, ()))
            cs = sorted((rel(u, t), tuple(sorted(s))) for (o, t), s in ws.cells.items() if o == u)
            conf = sorted((c[0], rel(u, c[2])) for c in ws.reach if c[1] == u)
            return (ws.frame[u], tuple(ats), tuple(cs), tuple(conf))
        locs.sort(key=sig)
        for o in locs:
            ids[o] = len(ids)

        def cfg(c):
            return c if c == FIN else (c[0], ids[c[1]], rel(c[1], c[2]))
        cells = tuple(sorted((ids[o], rel(o, t), tuple(sorted(s))) for (o, t), s in ws.cells.items()))
        atoms = tuple(sorted((p, tuple(ids[x] for x in args), rel(args[0], t))
                             for p, args, t in ws.atoms))
        meta = tuple((ws.frame[o], o in ws.segobj) for o in ws.chain)
        lmeta = tuple(ws.frame[o] for o in locs)
        pending = None
        if ws.pending:
            b, par, tau = ws.pending
            pending = (b, ids[par], rel(par, tau))
        seg = None
        if ws.seg:
            cur, bot, ntop, top = ws.seg
            seg = (bot is not None, ntop, rel(ws.chain[-1], top) if ntop == 1 else None)
        root = None
        if ws.root:
            if ws.root[0] == "bot":
                root = ("bot", ids[ws.root[1]])
            else:
                root = ("at", ids[ws.root[1]], rel(ws.root[1], ws.root[2]))
        reach = tuple(sorted(cfg(c) for c in ws.reach))
        summ = tuple(sorted((cfg(a), cfg(b)) for a, b in ws.summ))
        return (meta, lmeta, cells, atoms, pending, seg, root, reach, summ)

    def _decode(self, enc):
        meta, lmeta, cells, atoms, pending, seg, root, reach, summ = enc
        ws = _WS()
        n = len(meta) + len(lmeta)
        ws.chain = list(range(len(meta)))
        ws.kind = {i: ("c" if i < len(meta) else "l") for i in range(n)}
        ws.frame = {i: meta[i][0] for i in range(len(meta))}
        ws.frame.update({len(meta) + j: f for j, f in enumerate(lmeta)})
        ws.segobj = {i for i, m in enumerate(meta) if m[1]}
        ws.cells = {(o, t): frozenset(s) for o, t, s in cells}
        ws.atoms = set(atoms)
        ws.pending = pending
        ws.seg = [0, (0 if seg[0] else None), seg[1], seg[2]] if seg else None
        ws.root = root
        ws.nid = n
        ws.reach = set(reach)
        ws.summ = set(summ)
        ws.fresh = []
        ws.touched = set()
        return ws

    # --------------------------------------------------------- placement
    def _place(self, ws, b, head, t, child=None):
        rule = self.bodies.rule(b)
        idb = self.bodies.idb_atom[b]
        sub = {rule.head_args[0]: head}
        if idb is not None and child is not None:
            sub[idb.args[0]] = child
        for v in sorted(rule.variables):
            if v not in sub:
                sub[v] = ws.new_obj("l", ws.frame[head])
        for a in rule.body:
            if a is idb:
                continue
            args = tuple(sub[v] for v in a.args)
            ws.atoms.add((a.pred, args, t + a.offset))
            ws.touched.update(args)

    def _needed(self, ws, extra, with_locals=False):
        """Untracked cells that must now exist, given explicit (obj, lo, hi) requests."""
        want: dict = {}
        m = self.shape.margin
        fresh = set(ws.fresh) if with_locals else set()
        grow = ws.touched | {o for o, _, _ in extra}
        for p, args, t in ws.atoms:
            for x in args:
                if self.freeze and x not in grow:
                    continue
                if ws.kind[x] == "c" or x in fresh:
                    lo, hi = want.get(x, (t - m, t + m))
                    want[x] = (min(lo, t - m), max(hi, t + m))
        for o, lo, hi in extra:
            a, b = want.get(o, (lo, hi))
            want[o] = (min(a, lo), max(b, hi))
        have: dict = {}
        for (o, t) in ws.cells:
            a, b = have.get(o, (t, t))
            have[o] = (min(a, t), max(b, t))
        missing = []
        for o, (lo, hi) in want.items():
            if o in have and ws.kind[o] == "c":
                a, b = have[o]
                rng = range(b + 1, hi + 1) if o in ws.segobj else range(min(a, lo), max(b, hi) + 1)
            else:
                rng = range(lo, hi + 1)
            missing.extend((o, t) for t in rng if (o, t) not in ws.cells)
        return missing

    def _place_pending(self, ws, child):
        b, par, tau = ws.pending
        self._place(ws, b, par, tau, child)
        ws.pending = None
        return [] if par in ws.segobj else [(par, -1), (par, 1)]

    def _advance(self, ws, a):
        """Lay out one letter; None if the word is already incorrect.

        Returns (tails, extra): chain-object edges to close off and cell
        ranges that must be tracked."""
        sh = self.shape
        tails: list = []
        extra: list = []
        if is_vertical_letter(self.bodies, a):
            b = next(iter(a.bodies))
            if ws.seg:
                cursor, bot, ntop, top = ws.seg
                if bot is None or ntop != 1:
                    return None
                cur = ws.chain[-1]
                extra.append((cur, cursor, max(cursor, top) + sh.reach))
                tails.append((cur, 1))
                ws.seg = None
                ws.pending = (b, cur, top)
            elif ws.pending:
                b0, par, tau = ws.pending
                y = ws.new_obj("c", ws.frame[par])
                ws.chain.append(y)
                tails += self._place_pending(ws, y)
                ws.pending = (b, y, tau + self.bodies.offset(b0))
            else:
                x = ws.new_obj("c", 0)
                ws.chain.append(x)
                ws.pending = (b, x, 0)
                ws.root = ("at", x, 0)
                extra.append((x, 0, 0))
            return tails, extra
        if ws.seg:
            ws.seg[0] += 1
            cur = ws.chain[-1]
        else:
            if ws.pending:
                cur = ws.new_obj("c", 1)
            else:
                cur = ws.new_obj("c", 0)
                ws.root = ("bot", cur)
            ws.chain.append(cur)
            ws.segobj.add(cur)
            ws.seg = [0, None, 0, None]
            extra.append((cur, -sh.reach, sh.reach))
            tails.append((cur, -1))
        T = ws.seg[0]
        for b in sorted(a.bodies):
            self._place(ws, b, cur, T)
        if a.top:
            ws.seg[2] = min(2, ws.seg[2] + 1)
            if ws.seg[2] == 1:
                ws.seg[3] = T
        if a.bot:
            if ws.seg[1] is not None:
                return None
            ws.seg[1] = T
            if ws.pending:
                b0, par, tau = ws.pending
                self._shift_frame(ws, ws.frame[cur], tau + self.bodies.offset(b0) - T, ws.frame[par])
                tails += self._place_pending(ws, cur)
            elif ws.root and ws.root[0] == "bot":
                ws.root = ("at", cur, T)
        extra.append((cur, ws.seg[0], ws.seg[0] + sh.reach))
        return tails, extra

    def _finalize(self, ws):
        """Close the word; None if it is incorrect."""
        tails: list = []
        if ws.seg:
            if ws.seg[1] is None:
                return None
            tails.append((ws.chain[-1], 1))
        elif ws.pending:
            par = ws.pending[1]
            y = ws.new_obj("c", ws.frame[par])
            ws.chain.append(y)
            tails += self._place_pending(ws, y)
            tails += [(y, -1), (y, 1)]
        return tails, []

    # --------------------------------------------------------- forgetting
    def _gc_plan(self, ws):
        """Predicate telling which cells survive, and the chain objects to drop."""
        sh = self.shape
        keep = set(ws.chain[-(sh.diam + 1):])
        if ws.pending:
            keep.add(ws.pending[1])
        drop = {o for o in ws.chain if o not in keep}
        if ws.seg:
            fr = ws.frame[ws.chain[-1]]
            cursor, _, ntop, top = ws.seg
            low = cursor + 1 + self.ahead[0]
            win = (top + self.attach[0], top + self.attach[1]) if ntop == 1 else (1, 0)

            def kept(o, t):
                if o in drop:
                    return False
                return not (ws.frame[o] == fr and t < low and not (win[0] <= t <= win[1]))
        else:
            def kept(o, t):
                return o not in drop
        if self.freeze:
            kept = self._freeze(ws, kept)
        return kept, drop

    def _freeze(self, ws, base):
        """Narrow ``base`` to cells that can still meet a future atom.

        Only the current object and a pending parent receive atoms later, so
        any other object matters only within a match of atoms linking it to
        them."""
        active = {ws.chain[-1]} if ws.seg else set()
        hot: dict = {}
        if ws.pending:
            b, par, tau = ws.pending
            if par not in active:
                hot[par] = range(tau + self.attach[0], tau + self.attach[1] + 1)
        live = [a for a in ws.atoms if all(base(x, a[2]) for x in a[1])
                and all(a[2] in hot[x] for x in a[1] if x in hot)]
        dist = {o: 0 for o in active}
        dist.update({o: 0 for o in hot})
        frontier = set(dist)
        for d in range(self.shape.diam):
            nxt = set()
            for p, args, t in live:
                if frontier & set(args):
                    nxt |= {x for x in args if x not in dist}
            for x in nxt:
                dist[x] = d + 1
            frontier = nxt
        m = self.shape.margin
        allowed: dict = {}
        for p, args, t in live:
            if all(x in dist for x in args):
                for x in args:
                    if x not in active and x not in hot:
                        allowed.setdefault(x, set()).update(range(t - m, t + m + 1))

        def kept(o, t):
            if not base(o, t):
                return False
            return o in active or t in allowed.get(o, ()) or t in hot.get(o, ())
        return kept

    def _gc_apply(self, ws, kept, drop):
        ws.cells = {k: v for k, v in ws.cells.items() if kept(*k)}
        ws.atoms = {a for a in ws.atoms if all(kept(x, a[2]) for x in a[1])}
        alive = {x for a in ws.atoms for x in a[1]}
        for o in list(ws.kind):
            if o in drop or (ws.kind[o] == "l" and o not in alive):
                del ws.kind[o]
                del ws.frame[o]
                ws.segobj.discard(o)
        ws.cells = {k: v for k, v in ws.cells.items() if k[0] in ws.kind}
        ws.chain = [o for o in ws.chain if o not in drop]
        ws.reach = {c for c in ws.reach if _live(ws, c)}
        ws.summ = {(x, y) for x, y in ws.summ if _live(ws, x) and _live(ws, y)}
        ws.fresh = []
        ws.touched = set()

    def _moved(self, ws, pick, delta):
        """Shift every item whose (object, time) satisfies pick by delta."""
        def mv(o, t):
            return t + delta if pick(o, t) else t
        ws.cells = {(o, mv(o, t)): v for (o, t), v in ws.cells.items()}
        ws.atoms = {(p, args, mv(args[0], t)) for p, args, t in ws.atoms}
        def mc(c):
            return c if c == FIN else (c[0], c[1], mv(c[1], c[2]))
        ws.reach = {mc(c) for c in ws.reach}
        ws.summ = {(mc(x), mc(y)) for x, y in ws.summ}
        if ws.root and ws.root[0] == "at":
            ws.root = ("at", ws.root[1], mv(ws.root[1], ws.root[2]))

    def _compress(self, ws):
        """Pull a far-away ⊤ window up to a fixed distance behind the cursor.

        Once the two windows are more than a match span apart nothing can
        connect them, so their exact distance carries no information."""
        if not ws.seg or ws.seg[2] != 1:
            return
        sh = self.shape
        cursor, top = ws.seg[0], ws.seg[3]
        target = cursor - (2 * sh.reach + sh.span + 1)
        if top >= target:
            return
        fr = ws.frame[ws.chain[-1]]
        edge = top + sh.reach
        self._moved(ws, lambda o, t: ws.frame[o] == fr and t <= edge, target - top)
        ws.seg[3] = target

    def _shift_frame(self, ws, src, delta, dst):
        objs = {o for o in ws.frame if ws.frame[o] == src}
        self._moved(ws, lambda o, t: o in objs, delta)
        for o in objs:
            ws.frame[o] = dst
        if ws.seg and ws.chain[-1] in objs:
            c, b, n, tp = ws.seg
            ws.seg = [c + delta, None if b is None else b + delta, n,
                      None if tp is None else tp + delta]

    # --------------------------------------------------------- pure-rule tails
    def _tail_walk(self, content_size, side, starts, forward: bool):
        """Walk pure rules from inside cells through the outside (depth 1..H).

        Depth 0 is the edge cell and inside cells have negative depth.
        With forward=True facts flow body -> head (closure); otherwise
        derivation steps go head -> body.  Returns the inside nodes reached
        after at least one outside step."""
        H = self.shape.excursion
        # a rule head(t) <- body(t + k): left edge depth is lo - t
        sgn = 1 if side < 0 else -1
        moves = []
        for head, body, k in self.shape.pure:
            if forward:
                moves.append((body, head, sgn * k))
            else:
                moves.append((head, body, -sgn * k))
        seen = set(starts)
        stack = list(starts)
        back = set()
        while stack:
            p, d = stack.pop()
            for src, dst, dd in moves:
                if src != p:
                    continue
                nd = d + dd
                if nd <= 0:
                    if d > 0 and -nd < content_size:
                        back.add((dst, nd))
                    continue
                node = (dst, nd)
                if nd > H or node in seen:
                    continue
                seen.add(node)
                stack.append(node)
        return back

    def _edge_cells(self, ws, obj, side):
        k = self.shape.k
        times = [t for (o, t) in ws.cells if o == obj]
        edge = min(times) if side < 0 else max(times)
        return [edge - side * i for i in range(k)]


class NotAcceptBuilder(_WindowMachine):
    """States, steps and acceptance of the NotAccept NFA.

    A main-branch state is a canonical window of D_α in which every
    tracked cell of a chain object carries a guessed set of IDB
    predicates; cells of local objects hold the least closure.  Every
    rule instance inside the window must be satisfied, tails of chain
    objects must be closed under the pure rules, and the root cell must
    not hold the goal.  A side branch accepts the incorrect words.
    """

    BAD = "bad"

    def __init__(self, prog: Program, goal: str | None = None):
        super().__init__(prog, goal)
        self._tail_memo: dict = {}

    def initial(self):
        return {("main", EMPTY_WINDOW), (self.BAD, CORRECT_START)}

    def _guess(self, ws, missing):
        if not missing:
            return [ws]
        out = []
        for combo in itertools.product(self.shape.subsets, repeat=len(missing)):
            w = ws.copy()
            for cell, s in zip(missing, combo):
                w.cells[cell] = s
            out.append(w)
        return out

    def _tail_ok(self, ws, obj, side) -> bool:
        if not self.shape.k:
            return True
        times = self._edge_cells(ws, obj, side)
        content = tuple(ws.cells.get((obj, t), frozenset()) for t in times)
        key = (side, content)
        res = self._tail_memo.get(key)
        if res is None:
            starts = {(p, -i) for i, s in enumerate(content) for p in s}
            back = self._tail_walk(len(content), side, starts, forward=True)
            res = self._tail_memo[key] = back <= starts
        return res

    def _consistent(self, ws) -> bool:
        """Saturate local cells, then check every rule instance with a chain head."""
        sh = self.shape
        ext = sh.margin + sh.excursion
        lrange: dict = {}
        edb_rows: dict = {}
        for p, args, t in ws.atoms:
            edb_rows.setdefault(p, []).append(args + (t,))
            for x in args:
                if ws.kind[x] == "l":
                    a, b = lrange.get(x, (t, t))
                    lrange[x] = (min(a, t), max(b, t))
        lrange = {u: (a - ext, b + ext) for u, (a, b) in lrange.items()}
        while True:
            idb_rows: dict = {}
            for (o, t), s in ws.cells.items():
                for p in s:
                    idb_rows.setdefault(p, []).append((o, t))
            changed = False
            for head, hv, atoms in sh.rules:
                cons = []
                for pred, args, off, is_idb in atoms:
                    if is_idb:
                        rows = [(o, t - off) for o, t in idb_rows.get(pred, ())]
                    else:
                        rows = [r[:-1] + (r[-1] - off,) for r in edb_rows.get(pred, ())]
                    cons.append((tuple(args) + ("@",), rows))
                for asg in solve(cons):
                    o, t = asg[hv], asg["@"]
                    have = ws.cells.get((o, t))
                    if ws.kind[o] == "l":
                        lo, hi = lrange.get(o, (1, 0))
                        if lo <= t <= hi and (have is None or head not in have):
                            ws.cells[(o, t)] = (have or frozenset()) | {head}
                            changed = True
                    elif have is not None and head not in have:
                        return False
            if not changed:
                return True

    def _root_ok(self, ws) -> bool:
        if ws.root and ws.root[0] == "at":
            cell = ws.cells.get((ws.root[1], ws.root[2]))
            if cell is not None:
                if self.shape.goal in cell:
                    return False
                ws.root = None
        return True

    def _finish(self, ws, tails, extra) -> list:
        out = []
        for w in self._guess(ws, self._needed(ws, extra)):
            if all(self._tail_ok(w, o, side) for o, side in tails) \
                    and self._root_ok(w) and self._consistent(w):
                out.append(w)
        return out

    def step(self, state, a) -> set:
        if state[0] == self.BAD:
            return {(self.BAD, _corr_step(self.bodies, state[1], a))}
        if not letter_ok(self.bodies, a):
            return set()
        ws = self._decode(state[1])
        plan = self._advance(ws, a)
        if plan is None:
            return set()
        out = set()
        for w in self._finish(ws, *plan):
            kept, drop = self._gc_plan(w)
            self._gc_apply(w, kept, drop)
            self._compress(w)
            out.add(("main", self._encode(w)))
        return out

    def accepting(self, state) -> bool:
        if state[0] == self.BAD:
            return not _corr_accepting(state[1])
        ws = self._decode(state[1])
        if not ws.chain:
            return True
        plan = self._finalize(ws)
        return plan is not None and bool(self._finish(ws, *plan))


class AcceptBuilder(_WindowMachine):
    """Deterministic automaton for the words whose D_α entails the goal at the root.

    For a linear program a derivation of G(X) at 0 is a path in the graph
    of configurations (IDB, object, time): a rule instance leads from its
    head to its IDB atom, and ends at an instance of an initialisation
    rule (modelled as a step to a sentinel).  The state keeps the window of D_α, the configurations reachable
    from the root, and the reachability pairs between window cells that
    run through forgotten cells (so later letters can reuse them).
    """

    DONE = ("done",)
    freeze = True

    def __init__(self, prog: Program, goal: str | None = None):
        super().__init__(prog, goal)
        S = self.shape.span
        hz, vt = [0], [0]
        for b in self.bodies.flat:
            rule = self.bodies.rule(b)
            vertical = b in self.bodies.vertical
            for a in rule.body:
                if vertical and a is self.bodies.idb_atom[b]:
                    continue
                (vt if vertical else hz).append(a.offset)
        self.ahead = (min(hz) - S, max(hz) + S)
        self.attach = (min(vt) - S, max(vt) + S)

    def initial(self):
        return ("run", EMPTY_WINDOW)

    def _structure(self, ws):
        """Derivation steps and initialisation instances inside the window."""
        succ: dict = {}
        edb_rows: dict = {}
        for p, args, t in ws.atoms:
            edb_rows.setdefault(p, []).append(args + (t,))
        cells = ws.cells
        for head, hv, atoms in self.shape.rules:
            edb = [a for a in atoms if not a[3]]
            idb = [a for a in atoms if a[3]]
            if not edb:
                pred, args, k = idb[0][0], idb[0][1], idb[0][2]
                for (o, t) in cells:
                    if (o, t + k) in cells:
                        succ.setdefault((head, o, t), set()).add((pred, o, t + k))
                continue
            cons = [(tuple(args) + ("@",), [r[:-1] + (r[-1] - off,) for r in edb_rows.get(pred, ())])
                    for pred, args, off, _ in edb]
            for asg in solve(cons):
                o, t = asg[hv], asg["@"]
                if (o, t) not in cells:
                    continue
                if idb:
                    y, t2 = asg[idb[0][1][0]], t + idb[0][2]
                    if (y, t2) in cells:
                        succ.setdefault((head, o, t), set()).add((idb[0][0], y, t2))
                else:
                    succ.setdefault((head, o, t), set()).add(FIN)
        return succ

    def _tail_pairs(self, ws, obj, side):
        if not self.shape.k:
            return set()
        times = self._edge_cells(ws, obj, side)
        out = set()
        for i, t in enumerate(times):
            for p in self.shape.idb:
                for q, nd in self._tail_walk(len(times), side, {(p, -i)}, forward=False):
                    out.add(((p, obj, t), (q, obj, times[-nd])))
        return out

    @staticmethod
    def _closure(graph: dict, starts) -> set:
        seen = set(starts)
        stack = list(starts)
        while stack:
            c = stack.pop()
            for d in graph.get(c, ()):
                if d not in seen:
                    seen.add(d)
                    stack.append(d)
        return seen

    def _graph(self, ws):
        succ = self._structure(ws)
        for a, b in ws.summ:
            succ.setdefault(a, set()).add(b)
        return succ

    def _settle(self, ws, tails, extra):
        """Track new cells, add tail pairs, and propagate the root's reach.

        Returns True once the goal is derived."""
        for cell in self._needed(ws, extra, with_locals=True):
            ws.cells[cell] = frozenset()
        for u in ws.fresh:
            tails = tails + [(u, -1), (u, 1)]
        for o, side in tails:
            ws.summ |= self._tail_pairs(ws, o, side)
        if ws.root and ws.root[0] == "at" and (ws.root[1], ws.root[2]) in ws.cells:
            ws.reach.add((self.shape.goal, ws.root[1], ws.root[2]))
            ws.root = None
        graph = self._graph(ws)
        ws.reach = self._closure(graph, ws.reach)
        return FIN in ws.reach, graph

    def step(self, state, a):
        if state == self.DONE:
            return state
        if state == "dead" or not letter_ok(self.bodies, a):
            return "dead"
        ws = self._decode(state[1])
        plan = self._advance(ws, a)
        if plan is None:
            return "dead"
        done, graph = self._settle(ws, *plan)
        if done:
            return self.DONE
        if not ws.reach and ws.root is None:
            return "dead"
        kept, drop = self._gc_plan(ws)
        nodes = set(graph) | {d for ds in graph.values() for d in ds}
        keep_nodes = [c for c in nodes if c != FIN and kept(c[1], c[2])]
        before = {c: self._closure(graph, [c]) for c in keep_nodes}
        self._gc_apply(ws, kept, drop)
        ws.summ = set()
        post = self._structure(ws)
        for c in keep_nodes:
            if not _live(ws, c):
                continue
            direct = self._closure(post, [c])
            for d in before[c]:
                if d != c and d not in direct and _live(ws, d):
                    ws.summ.add((c, d))
        self._compress(ws)
        return ("run", self._encode(ws))

    def accepting(self, state) -> bool:
        if state == self.DONE:
            return True
        if state == "dead":
            return False
        ws = self._decode(state[1])
        if not ws.chain:
            return False
        plan = self._finalize(ws)
        if plan is None:
            return False
        done, _ = self._settle(ws, *plan)
        return done

    def accepts(self, word) -> bool:
        """Lazy deterministic run; incorrect words are rejected up front."""
        if not is_correct(self.bodies, word):
            return False
        q = self.initial()
        for a in word:
            q = self.step(q, a)
        return self.accepting(q)


def build_notaccept_nfa(prog: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET) -> Nfa:
    nb = NotAcceptBuilder(prog, goal)
    return Nfa(nb.initial(), nb.step, nb.accepting, alphabet(nb.bodies), budget, name="notaccept")


def build_accept_dfa(prog: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET,
                     minimal: bool = True, method: str = "summary") -> Dfa:
    """Minimal DFA for Accept over the correct-letter alphabet.

    method="summary" materialises the deterministic reachability-summary
    automaton; method="subset" determinises the NotAccept NFA and
    complements it (exponentially larger in practice)."""
    bodies = Bodies(prog, goal)
    alpha = alphabet(bodies)
    if method == "subset":
        nfa = build_notaccept_nfa(prog, goal, budget)
        d = complement_dfa(determinize(nfa, alpha, budget))
    elif method == "summary":
        ab = AcceptBuilder(prog, goal)
        d = dfa_from_predicate(alpha, ab.step, ab.initial(), ab.accepting, budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    d = product(d, correctness_dfa(bodies, alpha), "and")
    return minimize_dfa(d) if minimal else d


def build_expand_nfa(prog: Program, goal: str | None = None, budget: int = DEFAULT_BUDGET) -> Nfa:
    tw = build_expand_2nfa(prog, goal)
    return two_way_to_one_way(tw, alphabet(Bodies(prog, goal)), budget)


# ---------------------------------------------------------------- enrichments and legality

@dataclass(frozen=True)
class EnrichedLetter:
    """An Ω letter plus IDB atoms attached to its bodies.

    ``added`` holds (body, predicate, variable, k) meaning NEXT^k pred(variable)
    relative to the body's head time, with variable one of the body's own."""
    letter: Letter
    added: frozenset = frozenset()

    def __str__(self):
        extra = ",".join(f"b{b}:{p}({v})@{k:+d}" for b, p, v, k in sorted(self.added))
        return f"{self.letter}" + (f"[{extra}]" if extra else "")


def _layout(bodies: Bodies, word):
    """Place every body of a correct Ω-word: (letter index, body, substitution, head time)."""
    viol = correctness_violation(bodies, word)
    if viol:
        raise ValueError(f"incorrect word: {viol}")
    out = []
    var, t = "X", 0
    idx = itertools.count(1)
    pos = 0
    for vert, letters in segments(bodies, word):
        if vert:
            for a in letters:
                b = next(iter(a.bodies))
                sub = _fresh_body(bodies.rule(b), next(idx), var)
                out.append((pos, b, sub, t))
                pos += 1
                atom = bodies.idb_atom[b]
                var, t = sub[atom.args[0]], t + atom.offset
        else:
            jb = next(j for j, a in enumerate(letters) if a.bot)
            jt = next((j for j, a in enumerate(letters) if a.top), None)
            for j, a in enumerate(letters):
                for b in sorted(a.bodies):
                    out.append((pos, b, _fresh_body(bodies.rule(b), next(idx), var), t + j - jb))
                pos += 1
            if jt is not None:
                t = t + jt - jb
    return out


def _default_radius(prog: Program) -> int:
    return max([abs(a.offset or 0) for r in prog.rules for a in r.body] + [1])


def enriched_database(prog: Program, enriched, goal: str | None = None):
    """(EDB facts, declared IDB facts) of D_{α_e}; facts are (pred, args, t)."""
    bodies = Bodies(prog, goal)
    word = tuple(e.letter for e in enriched)
    edb, idb = set(), set()
    for pos, b, sub, t in _layout(bodies, word):
        rule = bodies.rule(b)
        own = bodies.idb_atom[b]
        for a in rule.body:
            if a is not own:
                edb.add((a.pred, tuple(sub[v] for v in a.args), t + a.offset))
        for bb, p, v, k in enriched[pos].added:
            if bb != b:
                continue
            if v not in sub:
                raise ValueError(f"variable {v} does not occur in body {b}")
            idb.add((p, (sub[v],), t + k))
    return edb, idb


def _windows(edb, radius):
    span: dict = {}
    for p, args, t in edb:
        for o in args:
            lo, hi = span.get(o, (t, t))
            span[o] = (min(lo, t), max(hi, t))
    return {o: (lo - radius, hi + radius) for o, (lo, hi) in span.items()}


def legality(prog: Program, enriched, goal: str | None = None, radius: int | None = None) -> bool:
    """Is D_{α_e} exactly the radius-cut of some model of the program?

    (1) every rule instance whose head lies inside a cut window is
    satisfied, and (2) outside the windows each timeline closes under the
    pure (IDB-only) rules without adding anything inside its window."""
    shape = _Shape(prog, goal)
    radius = radius if radius is not None else _default_radius(prog)
    edb, idb = enriched_database(prog, enriched, goal)
    win = _windows(edb, radius)

    def inside(o, t):
        w = win.get(o)
        return w is not None and w[0] <= t <= w[1]
    if any(not inside(args[0], t) for _, args, t in idb):
        return False
    pad = shape.excursion + shape.k + radius + 1
    facts = set(idb)
    # least closure of the declared atoms under the pure rules, per object
    while True:
        new = set()
        for head, body, k in shape.pure:
            for p, args, t in facts:
                if p != body:
                    continue
                lo, hi = win[args[0]]
                u = t - k
                if lo - pad <= u <= hi + pad and (head, args, u) not in facts:
                    new.add((head, args, u))
        if not new:
            break
        if any(inside(args[0], t) for _, args, t in new):
            return False
        facts |= new
    rows: dict = {}
    for p, args, t in facts | edb:
        rows.setdefault(p, []).append(args + (t,))
    for head, hv, atoms in shape.rules:
        cons = [(tuple(args) + ("@",), [r[:-1] + (r[-1] - off,) for r in rows.get(pred, ())])
                for pred, args, off, _ in atoms]
        for sol in solve(cons):
            o, t = sol[hv], sol["@"]
            if inside(o, t) and (head, (o,), t) not in facts:
                return False
    return True


def cut_enrichment(prog: Program, word, goal: str | None = None, radius: int | None = None):
    """Enrich a correct Ω-word with exactly the IDB atoms of its least model inside the cut.

    Cut windows extend ``radius`` past an object's EDB atoms, which are
    themselves up to ``radius`` from their body, so attachments use |k| <= 2·radius."""
    from .core import TemporalDatabase
    from .semantics import _window_model
    bodies = Bodies(prog, goal)
    shape = _Shape(prog, goal)
    radius = radius if radius is not None else _default_radius(prog)
    plain = tuple(EnrichedLetter(a) for a in word)
    edb, _ = enriched_database(prog, plain, goal)
    if not edb:
        return plain
    db = TemporalDatabase.from_facts(edb)
    l, r = db.extent
    pad = 2 * (shape.excursion + shape.k + radius + 2)
    model = _window_model(prog, db, l - pad, r + pad, 100000)
    win = _windows(edb, radius)
    places = _layout(bodies, word)
    added = [set() for _ in word]
    for p, s in model.items():
        for (o,), t in s:
            if o not in win or not (win[o][0] <= t <= win[o][1]):
                continue
            for pos, b, sub, tb in places:
                v = next((v for v, x in sorted(sub.items()) if x == o), None)
                if v is not None and abs(t - tb) <= 2 * radius:
                    added[pos].add((b, p, v, t - tb))
                    break
            else:
                raise ValueError(f"atom {p}({o})@{t} is not within reach of any body")
    return tuple(EnrichedLetter(a, frozenset(x)) for a, x in zip(word, added))
