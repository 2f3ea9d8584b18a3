"""Temporal CQ truth, homomorphisms, and two certain-answer evaluators."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .core import (AUX_MARK, BudgetError, Conj, FragmentError, Program, Rule,
                   TemporalAtom, TemporalDatabase, format_prefix, formula_vars,
                   max_weight, parse_query_text, prefix_weight)


@dataclass(frozen=True)
class TemporalCQ:
    answer_vars: tuple
    body: tuple

    @property
    def variables(self) -> list:
        seen: dict = {v: None for v in self.answer_vars}
        for f in self.body:
            for a in _leaves(f):
                for v in a.args:
                    seen.setdefault(v)
        return list(seen)

    @property
    def operator_count(self) -> int:
        def count(f):
            n = prefix_weight(f.prefix)
            if isinstance(f, Conj):
                n += sum(count(g) for g in f.parts)
            return n
        return sum(count(f) for f in self.body)

    @property
    def next_only(self) -> bool:
        return all(isinstance(t, int) for f in self.body for t in _all_prefix_tokens(f))

    def atoms(self) -> list:
        """Flattened prefixed atoms; only meaningful without F/P."""
        if not self.next_only:
            raise FragmentError("query contains sometime operators")
        out = []

        def walk(f, shift):
            if isinstance(f, TemporalAtom):
                out.append(TemporalAtom(f.pred, f.args, (shift + (f.offset or 0),)))
            else:
                for g in f.parts:
                    walk(g, shift + sum(f.prefix))
        for f in self.body:
            walk(f, 0)
        return out

    def __str__(self):
        head = "Q(" + ",".join(self.answer_vars) + ")"
        return head + " <- " + ", ".join(map(str, self.body)) + "."


def parse_tcq(text: str) -> TemporalCQ:
    _, hargs, body = parse_query_text(text)
    return TemporalCQ(tuple(hargs), body)


def tcq_of_atoms(answer_vars, atoms: Iterable) -> TemporalCQ:
    return TemporalCQ(tuple(answer_vars), tuple(atoms))


def _leaves(f):
    if isinstance(f, TemporalAtom):
        yield f
    else:
        for g in f.parts:
            yield from _leaves(g)


def _all_prefix_tokens(f):
    yield from f.prefix
    if isinstance(f, Conj):
        for g in f.parts:
            yield from _all_prefix_tokens(g)


# ---------------------------------------------------------------- truth

class _Evaluator:
    """Memoised truth of a formula tree under one full assignment.

    Times are clamped to [lo, hi]; outside that range every subformula is
    constant, so clamping is exact when the margin exceeds the operator count.
    """

    def __init__(self, db: TemporalDatabase, lo: int, hi: int):
        self.db, self.lo, self.hi = db, lo, hi
        self.facts = db.facts

    def clamp(self, t):
        return self.lo if t < self.lo else self.hi if t > self.hi else t

    def holds(self, f, asg: dict, t: int) -> bool:
        return self._prefixed(f, 0, asg, self.clamp(t), {})

    def _prefixed(self, f, i, asg, t, memo):
        key = (id(f), i, t)
        if key in memo:
            return memo[key]
        if i == len(f.prefix):
            res = self._core(f, asg, t, memo)
        else:
            tok = f.prefix[i]
            if isinstance(tok, int):
                res = self._prefixed(f, i + 1, asg, self.clamp(t + tok), memo)
            elif tok == "F":
                rng = range(t + 1, self.hi + 1) if t < self.hi else (self.hi,)
                res = any(self._prefixed(f, i + 1, asg, u, memo) for u in rng)
            else:
                rng = range(self.lo, t) if t > self.lo else (self.lo,)
                res = any(self._prefixed(f, i + 1, asg, u, memo) for u in rng)
        memo[key] = res
        return res

    def _core(self, f, asg, t, memo):
        if isinstance(f, TemporalAtom):
            return (f.pred, tuple(asg[v] for v in f.args), t) in self.facts
        return all(self._prefixed(g, 0, asg, t, memo) for g in f.parts)


def eval_tcq(db: TemporalDatabase, ell: int, q: TemporalCQ, bound: dict | None = None) -> bool:
    """D, ell |= q under the given (possibly partial) assignment."""
    n = q.operator_count
    l, r = db.extent
    ev = _Evaluator(db, l - n - 1, r + n + 1)
    bound = dict(bound or {})
    free = [v for v in q.variables if v not in bound]
    dom = sorted(db.domain)
    for vals in itertools.product(dom, repeat=len(free)):
        asg = dict(bound)
        asg.update(zip(free, vals))
        if all(ev.holds(f, asg, ell) for f in q.body):
            return True
    return False


class TruthTable:
    """Exact truth of one prefixed EDB atom at every timestamp in Z."""

    def __init__(self, db: TemporalDatabase, atom: TemporalAtom):
        w = prefix_weight(atom.prefix)
        l, r = db.extent
        self.lo, self.hi = l - w - 1, r + w + 1
        size = self.hi - self.lo + 1
        rows: dict = {}
        for args, t in db.by_pred.get(atom.pred, ()):
            if len(args) == len(atom.args):
                rows.setdefault(args, [False] * size)[t - self.lo] = True
        for tok in reversed(atom.prefix):
            for args, vals in rows.items():
                rows[args] = _apply_token(vals, tok, clamp=True)
        self.rows = {a: [self.lo + i for i, v in enumerate(vals) if v] for a, vals in rows.items()}
        self.sets = {a: set(ts) for a, ts in self.rows.items()}

    def holds(self, args, t) -> bool:
        t = self.lo if t < self.lo else self.hi if t > self.hi else t
        s = self.sets.get(tuple(args))
        return bool(s) and t in s

    def at(self, t) -> list:
        t = self.lo if t < self.lo else self.hi if t > self.hi else t
        return [a for a, s in self.sets.items() if t in s]


def _apply_token(vals: list, tok, clamp: bool) -> list:
    n = len(vals)
    if isinstance(tok, int):
        out = []
        for i in range(n):
            j = i + tok
            if 0 <= j < n:
                out.append(vals[j])
            else:
                out.append(vals[0 if j < 0 else n - 1] if clamp else False)
        return out
    out = [False] * n
    if tok == "F":
        seen = vals[n - 1] if clamp else False
        out[n - 1] = seen
        for i in range(n - 2, -1, -1):
            seen = seen or vals[i + 1]
            out[i] = seen
    else:
        seen = vals[0] if clamp else False
        out[0] = seen
        for i in range(1, n):
            seen = seen or vals[i - 1]
            out[i] = seen
    return out


# ---------------------------------------------------------------- joins

def solve(constraints: list, fixed: dict | None = None) -> Iterator[dict]:
    """Backtracking join. Each constraint is (terms, rows): a tuple of
    variable names and an iterable of equally long value tuples."""
    cons = [(tuple(terms), list(rows)) for terms, rows in constraints]
    if any(not rows for _, rows in cons):
        return
    cons.sort(key=lambda c: len(c[1]))
    indexes: dict = {}
    asg = dict(fixed or {})

    def candidates(ci):
        terms, rows = cons[ci]
        bound = tuple(i for i, v in enumerate(terms) if v in asg)
        if not bound:
            return rows
        key = (ci, bound)
        idx = indexes.get(key)
        if idx is None:
            idx = {}
            for row in rows:
                idx.setdefault(tuple(row[i] for i in bound), []).append(row)
            indexes[key] = idx
        return idx.get(tuple(asg[terms[i]] for i in bound), ())

    order: list = []
    remaining = list(range(len(cons)))
    known = set(asg)
    while remaining:
        best = max(remaining, key=lambda ci: (len(set(cons[ci][0]) & known), -len(cons[ci][1])))
        order.append(best)
        remaining.remove(best)
        known |= set(cons[best][0])

    def rec(k):
        if k == len(order):
            yield dict(asg)
            return
        terms = cons[order[k]][0]
        for row in candidates(order[k]):
            added = []
            ok = True
            for v, val in zip(terms, row):
                cur = asg.get(v)
                if cur is None:
                    asg[v] = val
                    added.append(v)
                elif cur != val:
                    ok = False
                    break
            if ok:
                yield from rec(k + 1)
            for v in added:
                del asg[v]

    yield from rec(0)


# ---------------------------------------------------------------- databases from queries

def db_of_tcq(q) -> TemporalDatabase:
    """Canonical database: objects are the variables, atoms at their offsets."""
    atoms = q.atoms() if isinstance(q, TemporalCQ) else list(q)
    facts = set()
    for a in atoms:
        if a.offset is None:
            raise FragmentError("sometime operator in a query turned into a database")
        facts.add((a.pred, a.args, a.offset))
    ts = [t for *_, t in facts] + [0]
    return TemporalDatabase.from_facts(facts, (min(ts), max(ts)))


def find_homomorphism(src: TemporalDatabase, dst: TemporalDatabase, anchors: dict | None = None):
    """Map src into dst: objects freely, timestamps by one rigid shift.

    ``anchors`` maps object names (str) and timestamps (int) of src.
    Returns ``(object_map, shift)`` or None.
    """
    anchors = dict(anchors or {})
    obj_anchor = {k: v for k, v in anchors.items() if isinstance(k, str)}
    time_anchor = {k: v for k, v in anchors.items() if isinstance(k, int)}
    shifts = {v - k for k, v in time_anchor.items()}
    if len(shifts) > 1:
        raise ValueError("inconsistent time anchors")
    (sl, sr), (dl, dr) = src.extent, dst.extent
    cands = sorted(shifts) if shifts else range(dl - sl, dr - sr + 1)
    for shift in cands:
        if sl + shift < dl or sr + shift > dr:
            continue
        cons = []
        for p, args, t in sorted(src.facts):
            rows = [a for a, u in dst.by_pred.get(p, ()) if u == t + shift and len(a) == len(args)]
            cons.append((args, rows))
        if not cons:
            return dict(obj_anchor), shift
        for sol in solve(cons, obj_anchor):
            return sol, shift
    return None


# ---------------------------------------------------------------- fixpoint evaluator

def _goal(prog: Program, goal):
    goal = goal or prog.goal
    if goal is None:
        raise ValueError("no goal predicate given")
    if goal not in prog.idb:
        raise ValueError(f"goal {goal} is not an IDB predicate")
    return goal


def _window_model(prog: Program, db: TemporalDatabase, lo: int, hi: int, max_rounds: int):
    """Least model of the program truncated to [lo, hi] (outside = false)."""
    tables: dict = {}
    model: dict = {p: set() for p in prog.idb}
    size = hi - lo + 1

    def edb_rows(atom):
        key = (atom.pred, atom.prefix, len(atom.args))
        if key not in tables:
            tab = TruthTable(db, atom)
            rows = []
            for args, ts in tab.sets.items():
                for t in range(lo, hi + 1):
                    if tab.holds(args, t):
                        rows.append(args + (t,))
            tables[key] = rows
        return tables[key]

    def idb_rows(atom):
        by_args: dict = {}
        for args, t in model[atom.pred]:
            by_args.setdefault(args, [False] * size)[t - lo] = True
        rows = []
        for args, vals in by_args.items():
            for tok in reversed(atom.prefix):
                vals = _apply_token(vals, tok, clamp=False)
            rows.extend(args + (lo + i,) for i, v in enumerate(vals) if v)
        return rows

    for _ in range(max_rounds):
        changed = False
        for rule in prog.rules:
            cons = []
            for a in rule.body:
                rows = idb_rows(a) if a.pred in prog.idb else edb_rows(a)
                cons.append((a.args + ("@t",), rows))
            new = set()
            for sol in solve(cons):
                new.add((tuple(sol[v] for v in rule.head_args), sol["@t"]))
            new -= model[rule.head_pred]
            if new:
                model[rule.head_pred] |= new
                changed = True
        if not changed:
            return model
    raise BudgetError("fixpoint iteration budget exceeded")


def _slices(model: dict, t: int) -> frozenset:
    return frozenset((p, a) for p, s in model.items() for a, u in s if u == t)


def _has_repeat(states: list) -> bool:
    return len(set(states)) < len(states)


def certain_fixpoint(prog: Program, db: TemporalDatabase, goal: str | None = None,
                     budget_window: int = 4096, max_rounds: int = 100000) -> list:
    """Certain answers of (prog, goal) over db, by windowed least fixpoint."""
    goal = _goal(prog, goal)
    l, r = db.extent
    k = max((max_weight(rule.body) for rule in prog.rules), default=0)
    b = 2 * (k + 1)
    prev = None
    while True:
        if b > budget_window:
            raise BudgetError(f"fixpoint window exceeded {budget_window}")
        lo, hi = l - b, r + b
        model = _window_model(prog, db, lo, hi, max_rounds)
        answers = sorted(((a, t) for a, t in model[goal] if l <= t <= r), key=lambda x: (x[1], x[0]))
        by_time: dict = {}
        for p, s in model.items():
            for a, t in s:
                by_time.setdefault(t, set()).add((p, a))
        sl = {t: frozenset(by_time.get(t, ())) for t in range(lo, hi + 1)}
        right = [(sl[t - 1], sl[t]) for t in range(r + k + 2, hi + 1)]
        left = [(sl[t], sl[t + 1]) for t in range(lo, l - k - 1)]
        if answers == prev and _has_repeat(right) and _has_repeat(left):
            return answers
        prev = answers
        b *= 2


# ---------------------------------------------------------------- linear evaluator

def linearize(prog: Program) -> Program:
    """Rewrite IDB atoms so each has a pure next prefix of size at most 1.

    Sometime operators and longer shifts on IDB atoms become chains of
    auxiliary IDB predicates (named with the reserved ``$aux`` marker).
    """
    rules = []
    made: dict = {}
    counter = itertools.count()

    def aux_for(pred: str, arity: int, prefix: tuple) -> str:
        if not prefix:
            return pred
        key = (pred, prefix)
        if key in made:
            return made[key]
        inner = aux_for(pred, arity, prefix[1:])
        tok = prefix[0]
        name = f"{pred}{AUX_MARK}{next(counter)}"
        made[key] = name
        vs = tuple(f"V{i}" for i in range(arity))
        if isinstance(tok, int):
            step = 1 if tok > 0 else -1
            cur = inner
            for _ in range(abs(tok) - 1):
                nxt = f"{pred}{AUX_MARK}{next(counter)}"
                rules.append(Rule(nxt, vs, (TemporalAtom(cur, vs, (step,)),)))
                cur = nxt
            rules.append(Rule(name, vs, (TemporalAtom(cur, vs, (step,)),)))
        else:
            step = 1 if tok == "F" else -1
            rules.append(Rule(name, vs, (TemporalAtom(inner, vs, (step,)),)))
            rules.append(Rule(name, vs, (TemporalAtom(name, vs, (step,)),)))
        return name

    for rule in prog.rules:
        body = []
        for a in rule.body:
            if a.pred in prog.idb and a.prefix and not (a.offset is not None and abs(a.offset) <= 1):
                body.append(TemporalAtom(aux_for(a.pred, len(a.args), a.prefix), a.args))
            else:
                body.append(a)
        rules.append(Rule(rule.head_pred, rule.head_args, tuple(body)))
    return Program(tuple(rules), prog.goal)


class LinearEngine:
    """Derivability over configurations (IDB, tuple, time) in a finite window.

    Rule bodies are translation invariant outside the EDB zone, and
    entailment sequences never need to leave the zone by more than
    M = 2 (|IDB| * |dom|^arity)^2 steps.
    """

    def __init__(self, prog: Program, db: TemporalDatabase, margin: int | None = None):
        if not prog.linear:
            raise FragmentError("linear evaluator needs a linear program")
        self.prog = linearize(prog)
        self.db = db
        l, r = db.extent
        edb_atoms = [a for rule in self.prog.rules for a in rule.body if a.pred not in self.prog.idb]
        w = max_weight(edb_atoms) + 1
        self.zlo, self.zhi = l - w, r + w
        arity = max((self.prog.arities[p] for p in self.prog.idb), default=0)
        dom = sorted(db.domain)
        self.dom = dom
        n = len(self.prog.idb) * max(1, len(dom)) ** arity
        self.margin = 2 * n * n if margin is None else margin
        self.lo, self.hi = self.zlo - self.margin, self.zhi + self.margin
        self.tables = {}
        self.rules = []
        for rule in self.prog.rules:
            idb = [a for a in rule.body if a.pred in self.prog.idb]
            edb = [a for a in rule.body if a.pred not in self.prog.idb]
            for a in edb:
                key = (a.pred, a.prefix)
                if key not in self.tables:
                    self.tables[key] = TruthTable(db, a)
            self.rules.append((rule, edb, idb[0] if idb else None))
        self._pairs: dict = {}

    def clamp(self, t):
        return self.zlo if t < self.zlo else self.zhi if t > self.zhi else t

    def pairs(self, ri: int, t: int) -> list:
        """(head tuple, IDB tuple or None) for rule ri holding at time t."""
        t = self.clamp(t)
        key = (ri, t)
        if key in self._pairs:
            return self._pairs[key]
        rule, edb, idb = self.rules[ri]
        cons = []
        for a in edb:
            tab = self.tables[(a.pred, a.prefix)]
            cons.append((a.args, [args for args in tab.at(t) if len(args) == len(a.args)]))
        needed = set(rule.head_args) | (set(idb.args) if idb else set())
        covered = {v for a in edb for v in a.args}
        for v in sorted(needed - covered):
            cons.append(((v,), [(d,) for d in self.dom]))
        out = set()
        for sol in solve(cons):
            h = tuple(sol[v] for v in rule.head_args)
            out.add((h, tuple(sol[v] for v in idb.args) if idb else None))
        res = sorted(out, key=lambda x: (x[0], x[1] or ()))
        self._pairs[key] = res
        return res

    def entails(self, pred: str, args: tuple, t: int) -> bool:
        """Point check by search from the target towards initialisation rules."""
        start = (pred, tuple(args), t)
        seen = {start}
        stack = [start]
        by_head: dict = {}
        for ri, (rule, _, _) in enumerate(self.rules):
            by_head.setdefault(rule.head_pred, []).append(ri)
        while stack:
            p, a, u = stack.pop()
            for ri in by_head.get(p, ()):
                idb = self.rules[ri][2]
                for h, d in self.pairs(ri, u):
                    if h != a:
                        continue
                    if idb is None:
                        return True
                    v = u + (idb.offset or 0)
                    nxt = (idb.pred, d, v)
                    if self.lo <= v <= self.hi and nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
        return False

    def derivable(self) -> set:
        """All derivable configurations in the window."""
        by_body: dict = {}
        for ri, (rule, _, idb) in enumerate(self.rules):
            if idb is not None:
                by_body.setdefault(idb.pred, []).append(ri)
        der = set()
        stack = []
        for ri, (rule, _, idb) in enumerate(self.rules):
            if idb is None:
                for t in range(self.lo, self.hi + 1):
                    for h, _ in self.pairs(ri, t):
                        c = (rule.head_pred, h, t)
                        if c not in der:
                            der.add(c)
                            stack.append(c)
        while stack:
            p, d, v = stack.pop()
            for ri in by_body.get(p, ()):
                rule, _, idb = self.rules[ri]
                u = v - (idb.offset or 0)
                if not self.lo <= u <= self.hi:
                    continue
                for h, dd in self.pairs(ri, u):
                    if dd == d:
                        c = (rule.head_pred, h, u)
                        if c not in der:
                            der.add(c)
                            stack.append(c)
        return der


def certain_linear(prog: Program, db: TemporalDatabase, goal: str | None = None) -> list:
    goal = _goal(prog, goal)
    eng = LinearEngine(prog, db)
    l, r = db.extent
    ans = [(a, t) for p, a, t in eng.derivable() if p == goal and l <= t <= r]
    return sorted(ans, key=lambda x: (x[1], x[0]))


def entails_linear(prog: Program, db: TemporalDatabase, goal: str, args: tuple, t: int) -> bool:
    return LinearEngine(prog, db).entails(goal, tuple(args), t)


def format_answers(answers: list) -> list:
    return [{"tuple": list(a), "time": t} for a, t in answers]


__all__ = ["TemporalCQ", "parse_tcq", "eval_tcq", "db_of_tcq", "find_homomorphism",
           "certain_fixpoint", "certain_linear", "entails_linear", "linearize",
           "LinearEngine", "TruthTable", "solve", "format_answers", "format_prefix"]
