"""Expansions of linear programs and their descriptions over the Ω alphabet.

Bodies are referred to by 1-based rule index in textual order.  A letter
of Ω is a triple ``(bodies, bot, top)``; a vertical letter is a singleton
holding one vertical body and no flags.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

from .core import Conj, FragmentError, Program, TemporalAtom, TemporalDatabase
from .semantics import LinearEngine, TemporalCQ, certain_fixpoint, db_of_tcq


# ---------------------------------------------------------------- body tables

class Bodies:
    """Per-body facts the word machinery needs: kind, IDB atom, offsets."""

    def __init__(self, prog: Program, goal: str | None = None):
        if not prog.linear:
            raise FragmentError("expansions need a linear program")
        self.prog = prog
        self.goal = goal or prog.goal
        if self.goal not in prog.idb:
            raise ValueError(f"goal {self.goal!r} is not an IDB predicate")
        self.ids = tuple(range(1, len(prog.rules) + 1))
        self.kind = {}
        self.idb_atom = {}
        for b in self.ids:
            info = prog.infos[b - 1]
            self.kind[b] = info.kind
            self.idb_atom[b] = info.idb_atoms[0] if info.idb_atoms else None

    def rule(self, b):
        return self.prog.rules[b - 1]

    def head(self, b) -> str:
        return self.rule(b).head_pred

    @cached_property
    def vertical(self) -> tuple:
        return tuple(b for b in self.ids if self.kind[b] == "vertical")

    @cached_property
    def horizontal(self) -> tuple:
        return tuple(b for b in self.ids if self.kind[b] == "horizontal")

    @cached_property
    def init(self) -> tuple:
        return tuple(b for b in self.ids if self.kind[b] == "initialization")

    @cached_property
    def flat(self) -> tuple:
        """Bodies allowed inside horizontal letters."""
        return tuple(b for b in self.ids if self.kind[b] != "vertical")

    def offset(self, b) -> int:
        a = self.idb_atom[b]
        if a is None:
            return 0
        if a.offset is None:
            raise FragmentError(f"body {b} puts a sometime operator on its IDB atom")
        return a.offset

    def check_next_only(self):
        if not self.prog.next_only:
            raise FragmentError("description words need a next-only program")
        if not self.prog.monadic:
            raise FragmentError("description words need a monadic program")
        for b in self.ids:
            if self.kind[b] == "recursive":
                raise FragmentError(f"body {b} is neither horizontal nor vertical")


# ---------------------------------------------------------------- expansions

@dataclass(frozen=True)
class Expansion:
    word: tuple
    complete: bool
    pending: str | None = None

    def __str__(self):
        return ",".join(map(str, self.word))


def _word_info(bodies: Bodies, word) -> Expansion:
    word = tuple(word)
    if not word:
        raise ValueError("empty word")
    expect = bodies.goal
    for i, b in enumerate(word):
        if b not in bodies.ids:
            raise ValueError(f"unknown body {b}")
        if bodies.head(b) != expect:
            raise ValueError(f"body {b} does not define {expect}")
        atom = bodies.idb_atom[b]
        if atom is None:
            if i != len(word) - 1:
                raise ValueError("initialisation body before the end of the word")
            return Expansion(word, True)
        expect = atom.pred
    return Expansion(word, False, expect)


def enumerate_expansions(prog: Program, goal: str | None = None, max_len: int = 6,
                         partial: bool = False):
    """Expansions in length-lexicographic order (partial ones too if asked)."""
    bodies = Bodies(prog, goal)
    frontier = [((), bodies.goal)]
    for n in range(1, max_len + 1):
        nxt = []
        out = []
        for word, pred in frontier:
            for b in bodies.ids:
                if bodies.head(b) != pred:
                    continue
                w = word + (b,)
                atom = bodies.idb_atom[b]
                if atom is None:
                    out.append(Expansion(w, True))
                else:
                    nxt.append((w, atom.pred))
                    if partial:
                        out.append(Expansion(w, False, atom.pred))
        out.sort(key=lambda e: e.word)
        yield from out
        frontier = nxt


def _fresh_body(rule, idx: int, head_var: str):
    sub = {v: f"{v}_{idx}" for v in rule.variables}
    if rule.head_args:
        sub[rule.head_args[0]] = head_var
    return sub


def compose(q: TemporalCQ, p: TemporalCQ, idb: frozenset, tag: str = "c") -> TemporalCQ:
    """Replace q's unique IDB atom D(Y) by p with p's answer variable set to Y."""
    leaves = []

    def find(f):
        if isinstance(f, TemporalAtom):
            if f.pred in idb:
                leaves.append(f)
        else:
            for g in f.parts:
                find(g)
    for f in q.body:
        find(f)
    if len(leaves) != 1:
        raise ValueError("left operand must contain exactly one IDB atom")
    target = leaves[0]
    if len(target.args) != len(p.answer_vars):
        raise ValueError("arity mismatch in composition")
    used = set(q.variables)
    sub = dict(zip(p.answer_vars, target.args))
    for v in p.variables:
        if v not in sub:
            name, i = f"{v}_{tag}", 0
            while name in used:
                i += 1
                name = f"{v}_{tag}{i}"
            sub[v] = name
            used.add(name)

    def rename(f):
        if isinstance(f, TemporalAtom):
            return f.renamed(sub)
        return Conj(tuple(rename(g) for g in f.parts), f.prefix)

    inner = tuple(rename(f) for f in p.body)
    if target.prefix:
        repl = (Conj(inner, target.prefix),)
    else:
        repl = inner

    def replace(f):
        if f is target:
            return repl
        if isinstance(f, TemporalAtom):
            return (f,)
        return (Conj(tuple(x for g in f.parts for x in replace(g)), f.prefix),)
    return TemporalCQ(q.answer_vars, tuple(x for f in q.body for x in replace(f)))


def body_query(prog: Program, b: int) -> TemporalCQ:
    rule = prog.rules[b - 1]
    return TemporalCQ(rule.head_args, rule.body)


def word_query(prog: Program, word, goal: str | None = None) -> TemporalCQ:
    """The composition B1 ∘ ... ∘ Bn as one temporal CQ."""
    q = body_query(prog, word[0])
    for i, b in enumerate(word[1:], start=2):
        q = compose(q, body_query(prog, b), prog.idb, tag=str(i))
    return q


def word_atoms(bodies: Bodies, word) -> tuple:
    """Flattened atoms of a next-only composition; the trailing IDB atom is dropped."""
    exp = _word_info(bodies, word)
    atoms = []
    var, t = "X", 0
    for i, b in enumerate(exp.word):
        rule = bodies.rule(b)
        sub = _fresh_body(rule, i + 1, var)
        idb = bodies.idb_atom[b]
        for a in rule.body:
            if a is idb:
                continue
            if a.offset is None:
                raise FragmentError("sometime operator in a body")
            atoms.append(TemporalAtom(a.pred, tuple(sub[v] for v in a.args), (t + a.offset,)))
        if idb is not None:
            var, t = sub[idb.args[0]], t + idb.offset
    return exp, atoms


def db_of_word(prog: Program, word, goal: str | None = None) -> TemporalDatabase:
    _, atoms = word_atoms(Bodies(prog, goal), word)
    return db_of_tcq(atoms)


def _entails(prog: Program, db: TemporalDatabase, goal: str, obj: str, t: int = 0) -> bool:
    if obj not in db.domain:
        return False
    if prog.linear:
        return LinearEngine(prog, db).entails(goal, (obj,), t)
    return ((obj,), t) in certain_fixpoint(prog, db, goal)


def in_accept(prog: Program, word, goal: str | None = None) -> bool:
    """D_w, prog, 0 |= goal(X) for a complete or partial word of body ids."""
    bodies = Bodies(prog, goal)
    _, atoms = word_atoms(bodies, word)
    return _entails(prog, db_of_tcq(atoms), bodies.goal, "X")


# ---------------------------------------------------------------- Ω words

@dataclass(frozen=True)
class Letter:
    bodies: frozenset
    bot: bool = False
    top: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bodies", frozenset(self.bodies))

    def key(self):
        return (tuple(sorted(self.bodies)), self.bot, self.top)

    def __str__(self):
        items = [f"b{b}" for b in sorted(self.bodies)]
        items += ["BOT"] * self.bot + ["TOP"] * self.top
        return "{" + ",".join(items) + "}"


def subset(a: Letter, b: Letter) -> bool:
    return a.bodies <= b.bodies and (b.bot or not a.bot) and (b.top or not a.top)


def vletter(b: int) -> Letter:
    return Letter(frozenset([b]))


def format_omega(word) -> str:
    return " ".join(map(str, word))


_LETTER = re.compile(r"\{([^}]*)\}")


def parse_omega(text: str) -> tuple:
    text = text.strip()
    letters = []
    pos = 0
    for m in _LETTER.finditer(text):
        if text[pos:m.start()].strip():
            raise ValueError(f"junk between letters: {text[pos:m.start()]!r}")
        pos = m.end()
        bodies, bot, top = set(), False, False
        for item in filter(None, (s.strip() for s in m.group(1).split(","))):
            if item == "BOT":
                bot = True
            elif item == "TOP":
                top = True
            elif item.startswith("b") and item[1:].isdigit():
                bodies.add(int(item[1:]))
            else:
                raise ValueError(f"bad letter item {item!r}")
        letters.append(Letter(frozenset(bodies), bot, top))
    if text[pos:].strip():
        raise ValueError(f"trailing junk {text[pos:]!r}")
    return tuple(letters)


def is_vertical_letter(bodies: Bodies, a: Letter) -> bool:
    return (len(a.bodies) == 1 and not a.bot and not a.top
            and next(iter(a.bodies)) in bodies.vertical)


def letter_ok(bodies: Bodies, a: Letter) -> bool:
    return is_vertical_letter(bodies, a) or a.bodies <= set(bodies.flat)


def segments(bodies: Bodies, word) -> list:
    """Split into maximal runs: list of (is_vertical, letters)."""
    out: list = []
    for a in word:
        v = is_vertical_letter(bodies, a)
        if out and out[-1][0] == v:
            out[-1][1].append(a)
        else:
            out.append((v, [a]))
    return out


def correctness_violation(bodies: Bodies, word) -> str | None:
    """None if the word is correct, else a description of the violated clause."""
    for i, a in enumerate(word):
        if not letter_ok(bodies, a):
            return f"letter {i + 1} {a} mixes a vertical body with other symbols"
    segs = segments(bodies, word)
    for si, (vert, letters) in enumerate(segs):
        if vert:
            continue
        bots = sum(a.bot for a in letters)
        tops = sum(a.top for a in letters)
        if bots != 1:
            return f"horizontal segment {si + 1} has {bots} BOT markers (needs exactly one)"
        if si + 1 < len(segs) and tops != 1:
            return f"horizontal segment {si + 1} has {tops} TOP markers (needs exactly one)"
    return None


def is_correct(bodies: Bodies, word) -> bool:
    return correctness_violation(bodies, word) is None


def describe(prog: Program, word, goal: str | None = None) -> tuple:
    """The Ω-description of a composition of bodies."""
    bodies = Bodies(prog, goal)
    bodies.check_next_only()
    exp = _word_info(bodies, word)
    out: list = []
    runs: list = []
    for b in exp.word:
        vert = bodies.kind[b] == "vertical"
        if runs and runs[-1][0] == vert:
            runs[-1][1].append(b)
        else:
            runs.append((vert, [b]))
    for vert, run in runs:
        if vert:
            out.extend(vletter(b) for b in run)
            continue
        lands, t = [], 0
        for b in run:
            lands.append(t)
            t += bodies.offset(b)
        exit_ = t if bodies.idb_atom[run[-1]] is not None else lands[-1]
        lo, hi = min(lands + [exit_]), max(lands + [exit_])
        cells = [set() for _ in range(hi - lo + 1)]
        for b, at in zip(run, lands):
            cells[at - lo].add(b)
        for i, cell in enumerate(cells):
            out.append(Letter(frozenset(cell), lo + i == 0, lo + i == exit_))
    return tuple(out)


def height(bodies: Bodies, word) -> int:
    return sum(is_vertical_letter(bodies, a) for a in word)


def omega_atoms(bodies: Bodies, word) -> list:
    """Atoms of Q_α (EDB part only), rooted at X at time 0."""
    viol = correctness_violation(bodies, word)
    if viol:
        raise ValueError(f"incorrect word: {viol}")
    atoms = []
    var, t = "X", 0
    counter = itertools.count(1)

    def place(b, head_var, at):
        rule = bodies.rule(b)
        sub = _fresh_body(rule, next(counter), head_var)
        idb = bodies.idb_atom[b]
        for a in rule.body:
            if a is not idb:
                atoms.append(TemporalAtom(a.pred, tuple(sub[v] for v in a.args), (at + a.offset,)))
        return sub

    for vert, letters in segments(bodies, word):
        if vert:
            for a in letters:
                b = next(iter(a.bodies))
                sub = place(b, var, t)
                idb = bodies.idb_atom[b]
                var, t = sub[idb.args[0]], t + idb.offset
        else:
            jb = next(j for j, a in enumerate(letters) if a.bot)
            jt = next((j for j, a in enumerate(letters) if a.top), None)
            for j, a in enumerate(letters):
                for b in sorted(a.bodies):
                    place(b, var, t + j - jb)
            if jt is not None:
                t = t + jt - jb
    return atoms


def db_of_omega(prog: Program, word, goal: str | None = None):
    """(D_α, Q_α) for a correct Ω-word; the root object is X at time 0."""
    bodies = Bodies(prog, goal)
    bodies.check_next_only()
    if not word:
        raise ValueError("empty word has no database")
    viol = correctness_violation(bodies, word)
    if viol:
        raise ValueError(f"incorrect word: {viol}")
    atoms = omega_atoms(bodies, word)
    q = TemporalCQ(("X",), tuple(atoms))
    return db_of_tcq(atoms), q


def in_accept_omega(prog: Program, word, goal: str | None = None) -> bool:
    """Membership in Accept: correct and D_α, prog, 0 |= goal(X)."""
    bodies = Bodies(prog, goal)
    if not word or not is_correct(bodies, word):
        return False
    db, _ = db_of_omega(prog, word, goal)
    return _entails(prog, db, bodies.goal, "X")


def _split_xy(bodies: Bodies, word):
    segs = segments(bodies, word)
    xs, ys = ([()] if not segs or not segs[0][0] else []), []
    for vert, letters in segs:
        (xs if vert else ys).append(tuple(letters))
    if len(ys) < len(xs):
        ys.append(())
    return xs, ys


def precedes(prog: Program, alpha, beta, goal: str | None = None) -> bool:
    """α ≼ β: same vertical segments, horizontal ones embed with a shift."""
    bodies = Bodies(prog, goal)
    ax, ay = _split_xy(bodies, alpha)
    bx, by = _split_xy(bodies, beta)
    if ax != bx:
        return False
    for ya, yb in zip(ay, by):
        m, s = len(ya), len(yb)
        if not any(all(subset(ya[j], yb[j + k]) for j in range(m)) for k in range(s - m + 1)):
            return False
    return True


def horizontal_letters(bodies: Bodies):
    """All horizontal letters over the program's flat bodies."""
    flat = bodies.flat
    for n in range(len(flat) + 1):
        for combo in itertools.combinations(flat, n):
            for bot in (False, True):
                for top in (False, True):
                    yield Letter(frozenset(combo), bot, top)


def alphabet(bodies: Bodies) -> list:
    """Every correct-letter of Ω, vertical letters first."""
    return [vletter(b) for b in bodies.vertical] + list(horizontal_letters(bodies))
