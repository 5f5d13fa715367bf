"""Finite timed words, time intervals and the two projection operators."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

INF = math.inf

Number = Union[int, float]  # endpoints are ints or +/-inf
Rational = Union[int, Fraction]


class TimedWordError(ValueError):
    pass


class IntervalError(ValueError):
    pass


def to_rational(value) -> Fraction:
    """Parse ``value`` into an exact rational.

    Accepts ints, Fractions, and strings such as ``"3/2"`` or ``"0.25"``.
    Floats are rejected: they cannot represent most boundary values exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not timestamps")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise TimedWordError(f"bad rational {value!r}") from exc
    raise TypeError(f"expected int, Fraction or str, got {type(value).__name__}")


def _endpoint(value) -> Number:
    if value in (INF, -INF):
        return value
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "oo", "∞"):
            return INF
        if text in ("-inf", "-oo", "-∞"):
            return -INF
        value = int(text)
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise IntervalError(f"interval endpoints must be integers, got {value}")
        value = value.numerator
    if isinstance(value, float):
        if not value.is_integer():
            raise IntervalError(f"interval endpoints must be integers, got {value}")
        value = int(value)
    if not isinstance(value, int):
        raise IntervalError(f"bad endpoint {value!r}")
    return value


@dataclass(frozen=True)
class Interval:
    """An interval with integer or infinite endpoints.

    Infinite endpoints are always open; an interval with ``lo == hi`` must be
    closed on both sides (punctual).
    """

    lo: Number
    hi: Number
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = _endpoint(self.lo), _endpoint(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo == INF or hi == -INF:
            raise IntervalError(f"degenerate infinite interval {self}")
        if lo > hi:
            raise IntervalError(f"lower endpoint exceeds upper endpoint in {self}")
        if lo == -INF and self.lo_closed:
            raise IntervalError("infinite endpoints must be open")
        if hi == INF and self.hi_closed:
            raise IntervalError("infinite endpoints must be open")
        if lo == hi and not (self.lo_closed and self.hi_closed):
            raise IntervalError(f"empty interval {self}")

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, True)

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        return parse_interval(text)

    @property
    def sup(self) -> Number:
        return self.hi

    @property
    def inf(self) -> Number:
        return self.lo

    @property
    def is_punctual(self) -> bool:
        return self.lo == self.hi

    @property
    def is_open(self) -> bool:
        """Both finite endpoints excluded (topologically open)."""
        return not self.lo_closed and not self.hi_closed

    @property
    def is_closed(self) -> bool:
        """Every finite endpoint included (topologically closed)."""
        lo_ok = self.lo == -INF or self.lo_closed
        hi_ok = self.hi == INF or self.hi_closed
        return lo_ok and hi_ok

    @property
    def is_nat(self) -> bool:
        return self.lo >= 0

    def __contains__(self, value) -> bool:
        return interval_contains(self, value)

    def negate(self) -> "Interval":
        """The interval ``{-v : v in self}``."""
        return Interval(-self.hi, -self.lo, self.hi_closed, self.lo_closed)

    def __str__(self) -> str:
        def show(v):
            if v == INF:
                return "inf"
            if v == -INF:
                return "-inf"
            return str(v)

        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{show(self.lo)},{show(self.hi)}{right}"


UNBOUNDED = Interval(0, INF, True, False)

_INTERVAL_RE = re.compile(
    r"^\s*([\[(])\s*([+-]?(?:\d+|inf|oo|∞))\s*,\s*([+-]?(?:\d+|inf|oo|∞))\s*([\])])\s*$"
)


def parse_interval(text: str) -> Interval:
    match = _INTERVAL_RE.match(text)
    if not match:
        raise IntervalError(f"cannot parse interval {text!r}")
    left, lo, hi, right = match.groups()
    return Interval(lo, hi, left == "[", right == "]")


def interval_contains(interval: Interval, value) -> bool:
    v = value if isinstance(value, (int, Fraction)) else to_rational(value)
    lo, hi = interval.lo, interval.hi
    if lo != -INF:
        if v < lo or (v == lo and not interval.lo_closed):
            return False
    if hi != INF:
        if v > hi or (v == hi and not interval.hi_closed):
            return False
    return True


# -- adjacency -------------------------------------------------------------


def _shared(a: Number, b: Number) -> bool:
    # infinities never count as shared boundaries
    return a == b and a not in (INF, -INF)


def is_adjacent(i1: Interval, i2: Interval) -> bool:
    """True iff a non-zero boundary of one interval meets the opposite boundary of the other."""
    return (_shared(i1.sup, i2.inf) and i1.sup != 0) or (
        _shared(i1.inf, i2.sup) and i1.inf != 0
    )


def is_nonadjacent(i1: Interval, i2: Interval) -> bool:
    return not is_adjacent(i1, i2)


def is_positively_nonadjacent(i1: Interval, i2: Interval) -> bool:
    if _shared(i1.sup, i2.inf) and not i1.sup <= 0:
        return False
    if _shared(i1.inf, i2.sup) and not i1.inf <= 0:
        return False
    return True


def is_negatively_nonadjacent(i1: Interval, i2: Interval) -> bool:
    if _shared(i1.sup, i2.inf) and not i1.sup >= 0:
        return False
    if _shared(i1.inf, i2.sup) and not i1.inf >= 0:
        return False
    return True


_PAIR_CHECKS = {
    "plain": is_nonadjacent,
    "positive": is_positively_nonadjacent,
    "negative": is_negatively_nonadjacent,
}


def set_nonadjacency(kind: str, intervals: Iterable[Interval]) -> bool:
    """Check every ordered pair (including each interval with itself)."""
    try:
        check = _PAIR_CHECKS[kind]
    except KeyError:
        raise ValueError(f"unknown non-adjacency kind {kind!r}") from None
    items = list(dict.fromkeys(intervals))
    return all(check(a, b) for a in items for b in items)


# -- timed words -----------------------------------------------------------


@dataclass(frozen=True)
class Event:
    props: frozenset
    tau: Fraction


@dataclass(frozen=True)
class TimedWord:
    """A finite timed word ``(props_1, tau_1) ... (props_n, tau_n)``.

    Positions are 1-based. Construction validates that the word is nonempty,
    starts at time 0, has non-decreasing timestamps and nonempty letters.
    """

    events: tuple

    def __init__(self, events: Iterable):
        evs = []
        for item in events:
            if isinstance(item, Event):
                props, tau = item.props, item.tau
            else:
                props, tau = item
            if isinstance(props, str):
                props = {props}
            evs.append(Event(frozenset(props), to_rational(tau)))
        object.__setattr__(self, "events", tuple(evs))
        self._validate()

    def _validate(self):
        if not self.events:
            raise TimedWordError("a timed word has at least one event")
        if self.events[0].tau != 0:
            raise TimedWordError(f"first timestamp must be 0, got {self.events[0].tau}")
        for idx, ev in enumerate(self.events, start=1):
            if not ev.props:
                raise TimedWordError(f"empty proposition set at position {idx}")
            if idx > 1 and ev.tau < self.events[idx - 2].tau:
                raise TimedWordError(f"timestamps decrease at position {idx}")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def props(self, pos: int) -> frozenset:
        return self.events[pos - 1].props

    def tau(self, pos: int) -> Fraction:
        return self.events[pos - 1].tau

    @property
    def dom(self) -> range:
        return range(1, len(self.events) + 1)

    @property
    def timestamps(self) -> tuple:
        return tuple(ev.tau for ev in self.events)

    @property
    def alphabet(self) -> frozenset:
        return frozenset().union(*(ev.props for ev in self.events))

    def __str__(self) -> str:
        return format_word(self)


@dataclass(frozen=True)
class PointedWord:
    word: TimedWord
    pos: int

    def __post_init__(self):
        if not 1 <= self.pos <= len(self.word):
            raise TimedWordError(f"position {self.pos} outside 1..{len(self.word)}")


def _fmt_tau(tau: Fraction) -> str:
    return str(tau.numerator) if tau.denominator == 1 else f"{tau.numerator}/{tau.denominator}"


def format_word(word: TimedWord) -> str:
    """Render ``word`` in the line-oriented text format (``tau : p q``)."""
    lines = [f"{_fmt_tau(ev.tau)} : {' '.join(sorted(ev.props))}" for ev in word]
    return "\n".join(lines) + "\n"


def parse_word(text: str) -> TimedWord:
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise TimedWordError(f"line {lineno}: expected '<tau> : <props>'")
        tau_text, props_text = line.split(":", 1)
        props = props_text.split()
        try:
            tau = to_rational(tau_text)
        except TimedWordError as exc:
            raise TimedWordError(f"line {lineno}: {exc}") from None
        events.append((frozenset(props), tau))
    try:
        return TimedWord(events)
    except TimedWordError as exc:
        raise TimedWordError(f"invalid timed word: {exc}") from None


# -- projections -----------------------------------------------------------


def project_simple(word: TimedWord, hidden: Iterable[str]) -> TimedWord:
    """Erase the propositions in ``hidden`` from every point.

    ``word`` must be a simple behaviour: every point keeps at least one
    visible proposition.
    """
    hidden = frozenset(hidden)
    events = []
    for pos, ev in enumerate(word, start=1):
        rest = ev.props - hidden
        if not rest:
            raise TimedWordError(
                f"not a simple behaviour: position {pos} carries only hidden propositions"
            )
        events.append((rest, ev.tau))
    return TimedWord(events)


def project_oversampled(word: TimedWord, hidden: Iterable[str]) -> TimedWord:
    """Delete oversampling points, then erase ``hidden`` from the rest."""
    hidden = frozenset(hidden)
    if not word.events[0].props - hidden:
        raise TimedWordError(
            "not an oversampled behaviour: the first point carries only hidden propositions"
        )
    return TimedWord(
        (ev.props - hidden, ev.tau) for ev in word if ev.props - hidden
    )


def is_simple_behaviour(word: TimedWord, hidden: Iterable[str]) -> bool:
    hidden = frozenset(hidden)
    return all(ev.props - hidden for ev in word)


def is_oversampled_behaviour(word: TimedWord, hidden: Iterable[str]) -> bool:
    return bool(word.events[0].props - frozenset(hidden))


def enumerate_words(
    props: Sequence[str],
    max_len: int,
    timestamps: Sequence[Rational] = (0, Fraction(1, 2), 1, Fraction(3, 2), 2),
    min_len: int = 1,
):
    """Yield every timed word over ``props`` up to ``max_len`` points.

    Letters range over nonempty subsets of ``props``; timestamps over the
    non-decreasing sequences drawn from ``timestamps`` that start at 0.
    """
    from itertools import combinations, combinations_with_replacement, product

    props = sorted(props)
    letters = [
        frozenset(c) for r in range(1, len(props) + 1) for c in combinations(props, r)
    ]
    grid = sorted({to_rational(t) for t in timestamps})
    if grid[0] != 0:
        raise ValueError("the timestamp grid must contain 0")
    for n in range(min_len, max_len + 1):
        for taus in combinations_with_replacement(grid, n - 1):
            times = (Fraction(0),) + taus
            for letters_seq in product(letters, repeat=n):
                yield TimedWord(zip(letters_seq, times))
