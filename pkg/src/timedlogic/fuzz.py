"""Seeded generators and the differential fuzzing harness.

Case ``i`` of a run with seed ``s`` draws from ``random.Random(case_seed(s, i))``
where ``case_seed`` is the SplitMix64 output for that index, so any single
case replays on its own and on every platform.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from . import automata as am
from .evaluator import Evaluator
from .formula import (
    And, Atom, Box, BoxPast, Eventually, EventuallyPast, Fk, Formula, Not, Or, Rat,
    Since, Until,
)
from .syntax import to_text
from .timedword import INF, Interval, TimedWord, format_word
from .reductions import eliminate_rat, fk_to_rat, rat_to_fk, until_via_frat

MASK64 = (1 << 64) - 1


class SplitMix64:
    """The SplitMix64 generator (Steele, Lea and Flood)."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def case_seed(seed: int, index: int) -> int:
    gen = SplitMix64(seed)
    gen.state = (gen.state + index * 0x9E3779B97F4A7C15) & MASK64
    return gen.next()


def case_rng(seed: int, index: int) -> random.Random:
    return random.Random(case_seed(seed, index))


# -- generators ------------------------------------------------------------------------

STEPS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(1), Fraction(3, 2), Fraction(2))


def random_word(rng: random.Random, props, max_len: int = 6, min_len: int = 1) -> TimedWord:
    props = sorted(props)
    n = rng.randint(min_len, max_len)
    tau = Fraction(0)
    events = []
    for idx in range(n):
        if idx:
            tau += rng.choice(STEPS)
        chosen = [p for p in props if rng.random() < 0.5] or [rng.choice(props)]
        events.append((chosen, tau))
    return TimedWord(events)


def random_automaton(rng: random.Random, formula_set, max_states: int = 3) -> am.SymbolicNFA:
    n = rng.randint(1, max_states)
    states = tuple(f"q{i}" for i in range(n))
    letters = am.all_letters(formula_set)
    density = rng.choice((0.4, 0.7, 1.0, 1.4))
    transitions = {
        (src, let, dst)
        for src in states for let in letters for dst in states
        if rng.random() < density / n
    }
    final = tuple(q for q in states if rng.random() < 0.5) or (rng.choice(states),)
    return am.SymbolicNFA(tuple(formula_set), states, states[0], final, transitions)


def random_closed_intervals(rng: random.Random, k: int, top: int = 4) -> tuple:
    """``k`` closed intervals with natural endpoints, sorted: sup(I_j) <= inf(I_j+1)."""
    points = sorted(rng.randint(0, top) for _ in range(2 * k))
    return tuple(Interval(points[2 * j], points[2 * j + 1]) for j in range(k))


def random_state_formula(rng: random.Random, props) -> Formula:
    """Small building blocks for the formula set S of automata modalities."""
    a, b = sorted(props)[:2]
    options = [
        lambda: Atom(a),
        lambda: Atom(b),
        lambda: Not(Atom(a)),
        lambda: And(Atom(a), Atom(b)),
        lambda: Eventually(Atom(b), Interval(0, 1, False, False)),
        lambda: Until(Atom(a), Atom(b)),
    ]
    return rng.choice(options)()


def random_formula_set(rng: random.Random, props, max_size: int = 2) -> tuple:
    m = rng.randint(1, max_size)
    return tuple((f"f{j + 1}", random_state_formula(rng, props)) for j in range(m))


def random_fk(rng: random.Random, props, k: Optional[int] = None) -> Fk:
    k = k if k is not None else rng.randint(1, 2)
    formulas = random_formula_set(rng, props)
    names = [n for n, _ in formulas]
    auts = tuple(random_automaton(rng, names) for _ in range(k + 1))
    return Fk(random_closed_intervals(rng, k), auts, formulas)


def random_rat(rng: random.Random, props) -> Rat:
    formulas = random_formula_set(rng, props)
    names = [n for n, _ in formulas]
    (iv,) = random_closed_intervals(rng, 1)
    return Rat(iv, random_automaton(rng, names), formulas)


def random_interval(rng: random.Random, top: int = 3) -> Interval:
    lo = rng.randint(0, top - 1)
    hi = rng.choice([rng.randint(lo, top), INF])
    if hi == INF:
        return Interval(lo, INF, rng.random() < 0.5, False)
    if lo == hi:
        return Interval(lo, hi)
    return Interval(lo, hi, rng.random() < 0.5, rng.random() < 0.5)


def random_until(rng: random.Random, props) -> Until:
    left = random_state_formula(rng, props)
    right = random_state_formula(rng, props)
    iv = None if rng.random() < 0.2 else random_interval(rng)
    return Until(left, right, iv)


def random_mtl(rng: random.Random, props, height: int = 3, modal_budget: int = 3) -> Formula:
    """An MTL formula of height <= ``height`` using at most ``modal_budget`` modalities."""
    budget = [modal_budget]
    props = sorted(props)

    def gen(h, top=False):
        if h <= 1:
            p = Atom(rng.choice(props))
            return Not(p) if rng.random() < 0.25 else p
        roll = 0.0 if top else rng.random()
        if budget[0] > 0 and roll < 0.6:
            budget[0] -= 1
            # past operators are vacuous at the first point, so the root looks forward
            kind = rng.choice(("U", "F", "G") if top else ("U", "S", "F", "G", "P", "H"))
            iv = None if rng.random() < 0.3 else random_interval(rng, 2)
            if kind in ("U", "S"):
                left, right = gen(h - 1), gen(h - 1)
                return (Until if kind == "U" else Since)(left, right, iv)
            inner = gen(h - 1)
            cls = {"F": Eventually, "G": Box, "P": EventuallyPast, "H": BoxPast}[kind]
            return cls(inner, iv)
        if roll < 0.8:
            return (And if rng.random() < 0.5 else Or)(gen(h - 1), gen(h - 1))
        return Not(gen(h - 1))

    return gen(height, top=True)


# -- differential harness ----------------------------------------------------------------


@dataclass(frozen=True)
class FuzzReport:
    target: str
    seed: int
    cases: int
    words: int
    ok: bool
    case: Optional[int] = None
    original: Optional[Formula] = None
    translated: Optional[Formula] = None
    word: Optional[TimedWord] = None
    pos: Optional[int] = None
    expected: Optional[bool] = None

    def to_text(self) -> str:
        if self.ok:
            return "OK\n"
        lines = [
            f"COUNTEREXAMPLE target={self.target} seed={self.seed} case={self.case} pos={self.pos}",
            f"original: {to_text(self.original)}",
            f"original value: {str(self.expected).lower()}",
            f"translated value: {str(not self.expected).lower()}",
            "word:",
            format_word(self.word).rstrip("\n"),
        ]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        data = {"target": self.target, "seed": self.seed, "cases": self.cases,
                "words": self.words, "ok": self.ok}
        if not self.ok:
            data.update(case=self.case, pos=self.pos, original=to_text(self.original),
                        word=format_word(self.word), expected=self.expected)
        return json.dumps(data, sort_keys=True)


PROPS = ("a", "b")


def _fk2rat(rng):
    f = random_fk(rng, PROPS)
    return f, fk_to_rat(f)


def _rat2fk(rng):
    f = random_rat(rng, PROPS)
    return f, rat_to_fk(f)


def _roundtrip(rng):
    f = random_fk(rng, PROPS, k=1)
    return f, eliminate_rat(fk_to_rat(f))


def _until(rng):
    f = random_until(rng, PROPS)
    return f, until_via_frat(f)


TARGETS: dict = {
    "fk2rat": _fk2rat,
    "rat2fk": _rat2fk,
    "roundtrip": _roundtrip,
    "until": _until,
}


def check_case(original: Formula, translated: Formula, words) -> Optional[tuple]:
    """First (word, pos, value of original) where the two disagree, if any."""
    for w in words:
        ev = Evaluator(w)
        for pos in w.dom:
            expected = ev.holds(original, pos)
            if ev.holds(translated, pos) != expected:
                return w, pos, expected
    return None


def run_fuzz(target: str, seed: int, cases: int, words_per_case: int = 12, max_len: int = 6,
             make: Optional[Callable] = None) -> FuzzReport:
    if make is None:
        if target not in TARGETS:
            raise ValueError(f"unknown fuzz target {target!r}; choose from {', '.join(sorted(TARGETS))}")
        make = TARGETS[target]
    total_words = 0
    for idx in range(cases):
        rng = case_rng(seed, idx)
        original, translated = make(rng)
        words = [random_word(rng, PROPS, max_len) for _ in range(words_per_case)]
        total_words += len(words)
        bad = check_case(original, translated, words)
        if bad is not None:
            w, pos, expected = bad
            return FuzzReport(target, seed, idx + 1, total_words, False, idx, original,
                              translated, w, pos, expected)
    return FuzzReport(target, seed, cases, total_words, True)
