"""Rewriting temporal CQs into two-sorted FO(<) and model checking FO(<).

Time variables are lowercase (t, t1, ...), object variables uppercase.
``psi(k, t)`` is the rewriting of a subformula k at a time inside the
extent; ``bnd(k, i)`` is the closed formula for the fixed time r+i (i > 0)
or l+i (i < 0), for |i| <= N+1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import Conj, TemporalAtom, TemporalDatabase


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class FAtom:
    pred: str
    objs: tuple
    t: str


@dataclass(frozen=True)
class Less:
    a: str
    b: str


@dataclass(frozen=True)
class Succ:
    """b = a + 1 within the extent."""
    a: str
    b: str


@dataclass(frozen=True)
class Min:
    t: str


@dataclass(frozen=True)
class Max:
    t: str


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    f: object


@dataclass(frozen=True)
class ExistsObject:
    var: str
    f: object


@dataclass(frozen=True)
class ExistsTime:
    var: str
    f: object


@dataclass(frozen=True)
class ForAllTime:
    var: str
    f: object


@dataclass(frozen=True)
class _Const:
    value: bool


TrueK = _Const(True)
FalseK = _Const(False)


def conj(*parts):
    flat = []
    for p in parts:
        if p == FalseK:
            return FalseK
        if p == TrueK:
            continue
        flat.extend(p.parts if isinstance(p, And) else (p,))
    if not flat:
        return TrueK
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts):
    flat = []
    for p in parts:
        if p == TrueK:
            return TrueK
        if p == FalseK:
            continue
        flat.extend(p.parts if isinstance(p, Or) else (p,))
    if not flat:
        return FalseK
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def exists_time(v, f):
    return f if isinstance(f, _Const) else ExistsTime(v, f)


def exists_obj(v, f):
    return f if isinstance(f, _Const) else ExistsObject(v, f)


# ---------------------------------------------------------------- rewriting

def _unfold(f):
    """Turn prefixed atoms / conjunctions into ('op', tok, sub) / ('and', parts) / ('atom', a)."""
    if isinstance(f, TemporalAtom):
        node = ("atom", TemporalAtom(f.pred, f.args))
    else:
        node = ("and", tuple(_unfold(g) for g in f.parts))
    for tok in reversed(f.prefix):
        if isinstance(tok, int):
            step = 1 if tok > 0 else -1
            for _ in range(abs(tok)):
                node = ("op", step, node)
        else:
            node = ("op", tok, node)
    return node


class _Rewriter:
    def __init__(self, n: int):
        self.n = n
        self.fresh = itertools.count(1)
        self.idx = [i for i in range(-n - 1, n + 2) if i != 0]

    def tvar(self):
        return f"t{next(self.fresh)}"

    def at_min(self, node):
        v = self.tvar()
        return exists_time(v, conj(Min(v), self.psi(node, v)))

    def at_max(self, node):
        v = self.tvar()
        return exists_time(v, conj(Max(v), self.psi(node, v)))

    def somewhere(self, node):
        v = self.tvar()
        return exists_time(v, self.psi(node, v))

    def psi(self, node, t):
        kind = node[0]
        if kind == "atom":
            a = node[1]
            return FAtom(a.pred, a.args, t)
        if kind == "and":
            return conj(*(self.psi(g, t) for g in node[1]))
        _, tok, sub = node
        if tok == 1:
            v = self.tvar()
            return disj(exists_time(v, conj(Succ(t, v), self.psi(sub, v))),
                        conj(Max(t), self.bnd(sub, 1)))
        if tok == -1:
            v = self.tvar()
            return disj(exists_time(v, conj(Succ(v, t), self.psi(sub, v))),
                        conj(Min(t), self.bnd(sub, -1)))
        if tok == "F":
            v = self.tvar()
            return disj(exists_time(v, conj(Less(t, v), self.psi(sub, v))),
                        *(self.bnd(sub, i) for i in range(1, self.n + 2)))
        v = self.tvar()
        return disj(exists_time(v, conj(Less(v, t), self.psi(sub, v))),
                    *(self.bnd(sub, i) for i in range(-self.n - 1, 0)))

    def bnd(self, node, i):
        n = self.n
        kind = node[0]
        if kind == "atom":
            return FalseK
        if kind == "and":
            return conj(*(self.bnd(g, i) for g in node[1]))
        _, tok, sub = node
        if tok == 1:
            if i == -1:
                return self.at_min(sub)
            if i == n + 1:
                return self.bnd(sub, n + 1)
            return self.bnd(sub, i + 1)
        if tok == -1:
            if i == 1:
                return self.at_max(sub)
            if i == -n - 1:
                return self.bnd(sub, -n - 1)
            return self.bnd(sub, i - 1)
        if tok == "F":
            if i == n + 1:
                return self.bnd(sub, n + 1)
            later = [j for j in self.idx if j > i]
            inside = [self.somewhere(sub)] if i < 0 else []
            return disj(*inside, *(self.bnd(sub, j) for j in later))
        if i == -n - 1:
            return self.bnd(sub, -n - 1)
        earlier = [j for j in self.idx if j < i]
        inside = [self.somewhere(sub)] if i > 0 else []
        return disj(*inside, *(self.bnd(sub, j) for j in earlier))


def _tree_of_query(q):
    body = q.body
    if len(body) == 1:
        return _unfold(body[0])
    return _unfold(Conj(tuple(body)))


def rewrite_tcq(q, time_var: str = "t"):
    """FO(<) formula with free object variables q.answer_vars and free time ``time_var``."""
    rw = _Rewriter(q.operator_count)
    f = rw.psi(_tree_of_query(q), time_var)
    for v in reversed([v for v in q.variables if v not in q.answer_vars]):
        f = exists_obj(v, f)
    return f


def boundary_formula(q, i: int):
    """Closed-in-time formula true iff q holds at r+i (i>0) or l+i (i<0)."""
    rw = _Rewriter(q.operator_count)
    f = rw.bnd(_tree_of_query(q), i)
    for v in reversed([v for v in q.variables if v not in q.answer_vars]):
        f = exists_obj(v, f)
    return f


# ---------------------------------------------------------------- evaluation

class SortError(TypeError):
    pass


@dataclass(frozen=True)
class TwoSortedStructure:
    db: TemporalDatabase

    @property
    def times(self) -> range:
        return self.db.times

    @property
    def objects(self) -> list:
        return sorted(self.db.domain)


def _time(b, v):
    val = b[v]
    if not isinstance(val, int):
        raise SortError(f"time variable {v} bound to {val!r}")
    return val


def eval_fo(s, f, bindings: dict | None = None) -> bool:
    if isinstance(s, TemporalDatabase):
        s = TwoSortedStructure(s)
    facts = s.db.facts
    lo, hi = s.db.extent
    objs = s.objects

    def ev(f, b):
        if isinstance(f, FAtom):
            vals = []
            for v in f.objs:
                o = b[v]
                if not isinstance(o, str):
                    raise SortError(f"object variable {v} bound to {o!r}")
                vals.append(o)
            return (f.pred, tuple(vals), _time(b, f.t)) in facts
        if isinstance(f, Less):
            return _time(b, f.a) < _time(b, f.b)
        if isinstance(f, Succ):
            return _time(b, f.b) == _time(b, f.a) + 1
        if isinstance(f, Min):
            return _time(b, f.t) == lo
        if isinstance(f, Max):
            return _time(b, f.t) == hi
        if isinstance(f, And):
            return all(ev(g, b) for g in f.parts)
        if isinstance(f, Or):
            return any(ev(g, b) for g in f.parts)
        if isinstance(f, Not):
            return not ev(f.f, b)
        if isinstance(f, _Const):
            return f.value
        if isinstance(f, ExistsTime):
            return any(ev(f.f, {**b, f.var: t}) for t in range(lo, hi + 1))
        if isinstance(f, ForAllTime):
            return all(ev(f.f, {**b, f.var: t}) for t in range(lo, hi + 1))
        if isinstance(f, ExistsObject):
            return any(ev(f.f, {**b, f.var: o}) for o in objs)
        raise TypeError(f"not a formula: {f!r}")

    return ev(f, dict(bindings or {}))


def expand_macros(f):
    """Replace Succ/Min/Max by their definitions in terms of < only."""
    fresh = itertools.count(1)

    def tv():
        return f"m{next(fresh)}"

    def go(f):
        if isinstance(f, Min):
            v = tv()
            return ForAllTime(v, Not(Less(v, f.t)))
        if isinstance(f, Max):
            v = tv()
            return ForAllTime(v, Not(Less(f.t, v)))
        if isinstance(f, Succ):
            v = tv()
            return And((Less(f.a, f.b), ForAllTime(v, Not(And((Less(f.a, v), Less(v, f.b)))))))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(go(g) for g in f.parts))
        if isinstance(f, Not):
            return Not(go(f.f))
        if isinstance(f, (ExistsTime, ForAllTime, ExistsObject)):
            return type(f)(f.var, go(f.f))
        return f

    return go(f)


# ---------------------------------------------------------------- printing

def format_fo(f) -> str:
    def p(f, top=False):
        if isinstance(f, FAtom):
            return f"{f.pred}({', '.join(f.objs + (f.t,))})"
        if isinstance(f, Less):
            return f"({f.a} < {f.b})"
        if isinstance(f, Succ):
            return f"({f.b} = {f.a}+1)"
        if isinstance(f, Min):
            return f"({f.t} = min)"
        if isinstance(f, Max):
            return f"({f.t} = max)"
        if isinstance(f, _Const):
            return "true" if f.value else "false"
        if isinstance(f, And):
            s = " & ".join(p(g) for g in f.parts)
            return s if top else f"({s})"
        if isinstance(f, Or):
            s = " | ".join(p(g) for g in f.parts)
            return s if top else f"({s})"
        if isinstance(f, Not):
            return "~" + p(f.f)
        if isinstance(f, ExistsTime):
            return f"E {f.var}. " + p(f.f, True) if top else f"(E {f.var}. {p(f.f, True)})"
        if isinstance(f, ForAllTime):
            return f"A {f.var}. " + p(f.f, True) if top else f"(A {f.var}. {p(f.f, True)})"
        if isinstance(f, ExistsObject):
            return f"E {f.var}. " + p(f.f, True) if top else f"(E {f.var}. {p(f.f, True)})"
        raise TypeError(f)
    return p(f, True)
