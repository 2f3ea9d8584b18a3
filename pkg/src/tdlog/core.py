"""Program and database model, concrete syntax, structural checks.

Prefixes are tuples of tokens: a nonzero int ``k`` stands for k-fold
next (negative = previous), and the strings ``"F"`` / ``"P"`` for
"sometime strictly in the future / past".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

SOMETIME_F = "F"
SOMETIME_P = "P"
AUX_MARK = "$aux"


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        loc = f"{line}:{col}: " if line else ""
        super().__init__(loc + msg)


class FragmentError(ValueError):
    """Program is outside the fragment an operation supports."""


class BudgetError(RuntimeError):
    """A resource cap was hit; the result is unknown."""


def normalize_prefix(tokens: Iterable) -> tuple:
    out: list = []
    for tok in tokens:
        if isinstance(tok, int):
            if out and isinstance(out[-1], int):
                out[-1] += tok
            else:
                out.append(tok)
            if out[-1] == 0:
                out.pop()
        elif tok in (SOMETIME_F, SOMETIME_P):
            out.append(tok)
        else:
            raise ValueError(f"bad prefix token {tok!r}")
    return tuple(out)


def prefix_weight(prefix: tuple) -> int:
    return sum(abs(t) if isinstance(t, int) else 1 for t in prefix)


def is_variable(name: str) -> bool:
    return bool(name) and name[0].isupper()


@dataclass(frozen=True, order=True)
class TemporalAtom:
    pred: str
    args: tuple
    prefix: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "prefix", normalize_prefix(self.prefix))

    @property
    def offset(self):
        """Pure next offset, or None when the prefix has F/P."""
        if any(not isinstance(t, int) for t in self.prefix):
            return None
        return sum(self.prefix)

    def shifted(self, k: int) -> "TemporalAtom":
        return TemporalAtom(self.pred, self.args, (k,) + self.prefix)

    def renamed(self, sub: dict) -> "TemporalAtom":
        return TemporalAtom(self.pred, tuple(sub.get(a, a) for a in self.args), self.prefix)

    def __str__(self):
        return format_prefix(self.prefix) + f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Conj:
    """Conjunction under a shared temporal prefix (query bodies only)."""
    parts: tuple
    prefix: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "prefix", normalize_prefix(self.prefix))

    def __str__(self):
        return format_prefix(self.prefix) + "(" + ", ".join(map(str, self.parts)) + ")"


@dataclass(frozen=True)
class Rule:
    head_pred: str
    head_args: tuple
    body: tuple

    def __post_init__(self):
        object.__setattr__(self, "head_args", tuple(self.head_args))
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def variables(self) -> set:
        vs = set(self.head_args)
        for a in self.body:
            vs.update(a.args)
        return vs

    def __str__(self):
        return f"{self.head_pred}({','.join(self.head_args)}) <- " + ", ".join(map(str, self.body)) + "."


@dataclass(frozen=True)
class RuleInfo:
    """Derived per-rule classification relative to a program's IDB set."""
    index: int
    recursive: bool
    idb_atoms: tuple
    horizontal: bool | None
    idb_offset: int | None
    linear: bool
    monadic: bool
    connected: bool

    @property
    def kind(self) -> str:
        if not self.recursive:
            return "initialization"
        if self.horizontal is None:
            return "recursive"
        return "horizontal" if self.horizontal else "vertical"


@dataclass(frozen=True)
class Program:
    rules: tuple
    goal: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        check_arities(self)

    @cached_property
    def arities(self) -> dict:
        return check_arities(self)

    @cached_property
    def idb(self) -> frozenset:
        return frozenset(r.head_pred for r in self.rules)

    @cached_property
    def edb(self) -> frozenset:
        return frozenset(a.pred for r in self.rules for a in r.body) - self.idb

    @cached_property
    def infos(self) -> tuple:
        return tuple(rule_info(self, i) for i in range(len(self.rules)))

    @property
    def linear(self) -> bool:
        return all(i.linear for i in self.infos)

    @property
    def monadic(self) -> bool:
        return all(self.arities[p] <= 1 for p in self.idb)

    @property
    def connected(self) -> bool:
        return all(i.connected for i in self.infos)

    @property
    def next_only(self) -> bool:
        return all(isinstance(t, int) for r in self.rules for a in r.body for t in a.prefix)

    @property
    def recursive(self) -> bool:
        return is_recursive_program(self)

    def with_goal(self, goal: str | None) -> "Program":
        return Program(self.rules, goal)

    def __str__(self):
        return format_program(self)


@dataclass(frozen=True)
class TemporalDatabase:
    facts: frozenset
    extent: tuple

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))
        l, r = self.extent
        if l > r:
            raise ValueError("extent must satisfy l <= r")
        for _, _, t in self.facts:
            if not l <= t <= r:
                raise ValueError(f"fact at {t} outside extent {self.extent}")

    @classmethod
    def from_facts(cls, facts: Iterable, extent=None) -> "TemporalDatabase":
        facts = frozenset((p, tuple(a), t) for p, a, t in facts)
        if extent is None:
            if not facts:
                raise ValueError("empty database has no extent")
            ts = [t for _, _, t in facts]
            extent = (min(ts), max(ts))
        return cls(facts, tuple(extent))

    @cached_property
    def domain(self) -> frozenset:
        return frozenset(c for _, args, _ in self.facts for c in args)

    @cached_property
    def by_pred(self) -> dict:
        out: dict = {}
        for p, args, t in self.facts:
            out.setdefault(p, set()).add((args, t))
        return out

    @property
    def times(self) -> range:
        return range(self.extent[0], self.extent[1] + 1)

    def slice(self, t: int) -> set:
        return {(p, a) for p, a, s in self.facts if s == t}

    def __str__(self):
        return format_database(self)


# ---------------------------------------------------------------- syntax

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>%[^\n]*)
  | (?P<directive>\#[A-Za-z]+)
  | (?P<arrow><-) | (?P<int>-?\d+) | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.@^-])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, off: int = 0) -> _Tok:
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, got {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def integer(self) -> int:
        t = self.next()
        if t.kind == "int":
            return int(t.text)
        if t.text == "-" and self.peek().kind == "int":
            return -int(self.next().text)
        self.error("expected integer", t)

    def atom(self, want_var: bool | None):
        t = self.next()
        if t.kind != "ident":
            self.error("expected predicate name", t)
        if "$" in t.text:
            self.error("predicate names may not contain '$'", t)
        self.expect("(")
        args = []
        if self.peek().text != ")":
            while True:
                a = self.next()
                if a.kind not in ("ident", "int"):
                    self.error("expected term", a)
                if want_var is True and not is_variable(a.text):
                    self.error(f"constant {a.text!r} in a rule (rules are constant-free)", a)
                if want_var is False and is_variable(a.text):
                    self.error(f"variable {a.text!r} where a constant is expected", a)
                args.append(a.text)
                if self.peek().text != ",":
                    break
                self.next()
        self.expect(")")
        return t.text, tuple(args), t

    @staticmethod
    def _applied(t: _Tok, nxt: _Tok) -> bool:
        # "F(" is a predicate named F; "F (" is an operator before a group
        return nxt.text == "(" and nxt.line == t.line and nxt.col == t.col + len(t.text)

    def prefix(self) -> tuple:
        toks: list = []
        while True:
            t = self.peek()
            if t.kind != "ident" or self._applied(t, self.peek(1)):
                return tuple(toks)
            if t.text == "O":
                self.next()
                sign = 1
                if self.peek().text == "-":
                    self.next()
                    sign = -1
                k = 1
                if self.peek().text == "^":
                    self.next()
                    k = self.integer()
                toks.append(sign * k)
            elif t.text in (SOMETIME_F, SOMETIME_P):
                self.next()
                toks.append(t.text)
            else:
                self.error(f"unknown operator {t.text!r}", t)

    def formula(self, allow_groups: bool):
        pre = self.prefix()
        if allow_groups and self.peek().text == "(":
            self.next()
            parts = [self.formula(True)]
            while self.peek().text == ",":
                self.next()
                parts.append(self.formula(True))
            self.expect(")")
            return Conj(tuple(parts), pre)
        pred, args, _ = self.atom(True)
        return TemporalAtom(pred, args, pre)

    def clause(self, allow_groups: bool):
        hp, hargs, htok = self.atom(True)
        self.expect("<-")
        body = [self.formula(allow_groups)]
        while self.peek().text == ",":
            self.next()
            body.append(self.formula(allow_groups))
        self.expect(".")
        bvars = set()
        for f in body:
            bvars |= formula_vars(f)
        for v in hargs:
            if v not in bvars:
                raise ParseError(f"head variable {v} does not occur in the body", htok.line, htok.col)
        return hp, hargs, tuple(body)


def parse_program(text: str) -> Program:
    p = _Parser(text)
    rules, goal = [], None
    while p.peek().kind != "eof":
        if p.peek().kind == "directive":
            d = p.next()
            if d.text != "#goal":
                p.error(f"unknown directive {d.text}", d)
            g = p.next()
            if g.kind != "ident":
                p.error("expected goal predicate", g)
            goal = g.text
            p.expect(".")
            continue
        hp, hargs, body = p.clause(False)
        rules.append(Rule(hp, hargs, body))
    try:
        prog = Program(tuple(rules), goal)
    except ValueError as e:
        raise ParseError(str(e)) from None
    if goal is not None and goal not in prog.idb:
        raise ParseError(f"goal {goal} is not an IDB predicate")
    return prog


def parse_database(text: str) -> TemporalDatabase:
    p = _Parser(text)
    facts = set()
    arities: dict = {}
    while p.peek().kind != "eof":
        pred, args, tok = p.atom(False)
        if arities.setdefault(pred, len(args)) != len(args):
            p.error(f"arity mismatch for {pred}", tok)
        p.expect("@")
        t = p.integer()
        p.expect(".")
        facts.add((pred, args, t))
    if not facts:
        raise ParseError("empty database (extent undefined)", 1, 1)
    return TemporalDatabase.from_facts(facts)


def parse_query_text(text: str):
    """Parse ``Q(X) <- body.`` where the body may group conjunctions."""
    p = _Parser(text)
    out = p.clause(True)
    if p.peek().kind != "eof":
        p.error("trailing input after query")
    return out


def formula_vars(f) -> set:
    if isinstance(f, TemporalAtom):
        return set(f.args)
    out = set()
    for g in f.parts:
        out |= formula_vars(g)
    return out


def format_prefix(prefix: tuple) -> str:
    out = []
    for t in prefix:
        if isinstance(t, int):
            op = "O" if t > 0 else "O-"
            out.append(op if abs(t) == 1 else f"{op}^{abs(t)}")
        else:
            out.append(t)
    return "".join(s + " " for s in out)


def format_program(prog: Program) -> str:
    lines = [f"#goal {prog.goal}."] if prog.goal else []
    lines += [str(r) for r in prog.rules]
    return "\n".join(lines) + "\n"


def format_database(db: TemporalDatabase) -> str:
    return "\n".join(f"{p}({','.join(a)})@{t}." for p, a, t in
                     sorted(db.facts, key=lambda f: (f[2], f[0], f[1]))) + "\n"


# ---------------------------------------------------------------- analysis

def check_arities(prog: Program) -> dict:
    ar: dict = {}
    for r in prog.rules:
        for pred, args in [(r.head_pred, r.head_args)] + [(a.pred, a.args) for a in r.body]:
            if ar.setdefault(pred, len(args)) != len(args):
                raise ValueError(f"arity mismatch for predicate {pred}")
    return ar


def gaifman_connected(atoms: Iterable) -> bool:
    atoms = list(atoms)
    if any(len(a.args) == 0 for a in atoms):
        return False
    vs = {v for a in atoms for v in a.args}
    if not vs:
        return False
    adj: dict = {v: set() for v in vs}
    for a in atoms:
        for u in a.args:
            adj[u].update(a.args)
    seen, stack = set(), [next(iter(vs))]
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(adj[v] - seen)
    return seen == vs


def rule_info(prog: Program, i: int) -> RuleInfo:
    r = prog.rules[i]
    idb_atoms = tuple(a for a in r.body if a.pred in prog.idb)
    linear = len(idb_atoms) <= 1
    horizontal = offset = None
    if len(idb_atoms) == 1:
        a = idb_atoms[0]
        offset = a.offset
        if len(a.args) == 1 and len(r.head_args) == 1:
            horizontal = a.args[0] == r.head_args[0]
    return RuleInfo(
        index=i,
        recursive=bool(idb_atoms),
        idb_atoms=idb_atoms,
        horizontal=horizontal,
        idb_offset=offset,
        linear=linear,
        monadic=len(r.head_args) <= 1 and all(len(a.args) <= 1 for a in idb_atoms),
        connected=gaifman_connected(r.body),
    )


def idb_depends(prog: Program) -> dict:
    dep: dict = {p: set() for p in prog.idb}
    for r in prog.rules:
        dep[r.head_pred].update(a.pred for a in r.body if a.pred in prog.idb)
    return dep


def is_recursive_program(prog: Program) -> bool:
    """True when the IDB dependency graph has a cycle."""
    dep = idb_depends(prog)
    state: dict = {}

    def visit(p):
        state[p] = 1
        for q in dep[p]:
            if state.get(q) == 1 or (q not in state and visit(q)):
                return True
        state[p] = 2
        return False

    return any(p not in state and visit(p) for p in dep)


def fragment(prog: Program) -> str:
    if not is_recursive_program(prog):
        return "non-recursive"
    prefixes = [a.prefix for r in prog.rules for a in r.body]
    if all(not pre for pre in prefixes):
        return "plain datalog"
    if all(prog.arities[p] == 0 for p in prog.arities) or all(len(r.variables) <= 1 for r in prog.rules):
        return "plain LTL"
    if prog.next_only:
        return "datalog-next"
    return "datalog-all"


@dataclass
class Diagnostics:
    rules: list = field(default_factory=list)
    fragment: str = ""
    linear: bool = True
    monadic: bool = True
    connected: bool = True
    next_only: bool = True
    recursive: bool = False

    def as_dict(self) -> dict:
        return {"fragment": self.fragment, "linear": self.linear, "monadic": self.monadic,
                "connected": self.connected, "next_only": self.next_only,
                "recursive": self.recursive, "rules": self.rules}


def validate(prog: Program) -> Diagnostics:
    d = Diagnostics(fragment=fragment(prog), linear=prog.linear, monadic=prog.monadic,
                    connected=prog.connected, next_only=prog.next_only,
                    recursive=is_recursive_program(prog))
    for info, r in zip(prog.infos, prog.rules):
        d.rules.append({"rule": str(r), "kind": info.kind, "linear": info.linear,
                        "monadic": info.monadic, "connected": info.connected,
                        "idb_offset": info.idb_offset})
    return d


def max_weight(atoms: Iterable) -> int:
    return max((prefix_weight(a.prefix) for a in atoms), default=0)
