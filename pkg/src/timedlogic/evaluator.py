"""Pointwise strict semantics over finite timed words.

An :class:`Evaluator` is bound to one word and memoizes subformula truth per
(node, position, relevant valuation).  It evaluates sugar nodes directly,
so callers do not have to desugar first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Mapping, Optional
import weakref

from .automata import SymbolicNFA
from .formula import (
    And, Atom, Box, BoxNS, BoxPast, Eventually, EventuallyNS, EventuallyPast,
    FalseF, Fk, Formula, FRat, Freeze, Iff, Implies, Next, Not, Or, Pk, PRat, Prev,
    Rat, Since, SinceNS, TMinusX, TrueF, Until, UntilNS, XMinusT, children,
)
from .timedword import Interval, TimedWord


class EvaluationError(ValueError):
    pass


def accept_empty_word(automaton: SymbolicNFA) -> bool:
    """Default policy for a Rat window holding no points: accept iff epsilon is accepted."""
    return automaton.accepts_empty


def reject_empty_window(automaton: SymbolicNFA) -> bool:
    return False


EmptyPolicy = Callable[[SymbolicNFA], bool]


@dataclass(frozen=True)
class EvalContext:
    word: TimedWord
    pos: int
    valuation: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.pos <= len(self.word):
            raise EvaluationError(f"position {self.pos} outside 1..{len(self.word)}")


# free clocks per node, shared by all evaluators; entries leave with their node
_FREE_VARS: dict = {}
_REFS: dict = {}


def _forget(key):
    def drop(_):
        _FREE_VARS.pop(key, None)
        _REFS.pop(key, None)
    return drop


def _index_free_vars(f: Formula):
    if id(f) in _FREE_VARS:
        return
    # post-order without recursion
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        key = id(node)
        if key in _FREE_VARS:
            continue
        if done:
            if isinstance(node, (TMinusX, XMinusT)):
                fv = frozenset([node.var])
            else:
                fv = frozenset().union(*(_FREE_VARS[id(c)] for c in children(node)))
                if isinstance(node, Freeze):
                    fv = fv - {node.var}
            _REFS[key] = weakref.ref(node, _forget(key))
            _FREE_VARS[key] = fv
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in children(node))


class Evaluator:
    def __init__(self, word: TimedWord, empty_policy: EmptyPolicy = accept_empty_word):
        self.word = word
        self.n = len(word)
        # times are scaled to integers so interval tests avoid Fraction arithmetic
        self.scale = lcm(*(t.denominator for t in word.timestamps))
        self.tau = (None,) + tuple(int(t * self.scale) for t in word.timestamps)
        self.props = (None,) + tuple(ev.props for ev in word)
        self.empty_policy = empty_policy
        self._memo = {}
        self._fv = _FREE_VARS
        self._keep = []  # keeps nodes alive so memo ids stay unique
        self._bounds = {}

    # -- public

    def holds(self, f: Formula, pos: int = 1, valuation: Optional[Mapping] = None) -> bool:
        if not 1 <= pos <= self.n:
            raise EvaluationError(f"position {pos} outside 1..{self.n}")
        nu = self._scaled(valuation)
        self._index(f)
        missing = self._fv[id(f)] - nu.keys()
        if missing:
            raise EvaluationError(f"unbound freeze variable(s): {', '.join(sorted(missing))}")
        return self._eval(f, pos, nu)

    def letters(self, formulas, x: int, y: int, valuation=None, reverse=False) -> list:
        """Exact truth sets of ``formulas`` over positions x..y (or x down to y)."""
        nu = self._scaled(valuation)
        for _, g in formulas:
            self._index(g)
        step = -1 if reverse else 1
        if (y < x and not reverse) or (y > x and reverse):
            return []
        return [self._letter(formulas, z, nu) for z in range(x, y + step, step)]

    # -- internals

    def _scaled(self, valuation) -> dict:
        if valuation is None:
            return {}
        out = {}
        for k, v in valuation.items():
            v = Fraction(v) * self.scale
            out[k] = int(v) if v.denominator == 1 else v
        return out

    def _scaled_bounds(self, interval: Interval) -> tuple:
        b = self._bounds.get(id(interval))
        if b is None:
            s = self.scale
            b = (interval.lo * s, interval.hi * s, interval.lo_closed, interval.hi_closed)
            self._bounds[id(interval)] = b
            self._keep.append(interval)
        return b

    def _in(self, interval: Optional[Interval], d) -> bool:
        if interval is None:
            return True
        lo, hi, lo_closed, hi_closed = self._scaled_bounds(interval)
        return (d > lo or (lo_closed and d == lo)) and (d < hi or (hi_closed and d == hi))

    def _past(self, interval: Optional[Interval], d) -> bool:
        """True once ``d`` has passed the upper end of ``interval`` (scans can stop)."""
        if interval is None:
            return False
        _, hi, _, hi_closed = self._scaled_bounds(interval)
        return d > hi or (d == hi and not hi_closed)

    def _index(self, f: Formula):
        _index_free_vars(f)
        self._keep.append(f)

    def _key(self, f, pos, nu):
        fv = self._fv.get(id(f))
        if fv is None:
            self._index(f)
            fv = self._fv[id(f)]
        if not fv:
            return (id(f), pos)
        return (id(f), pos, tuple(sorted((v, nu[v]) for v in fv if v in nu)))

    def _eval(self, f: Formula, i: int, nu) -> bool:
        key = self._key(f, i, nu)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        res = self._compute(f, i, nu)
        self._memo[key] = res
        return res

    def _letter(self, formulas, z, nu) -> frozenset:
        return frozenset(name for name, g in formulas if self._eval(g, z, nu))

    def _compute(self, f: Formula, i: int, nu) -> bool:
        rule = _RULES.get(type(f))
        if rule is None:
            raise EvaluationError(f"cannot evaluate node {type(f).__name__}")
        return rule(self, f, i, nu)

    def _atom(self, f, i, nu):
        return f.name in self.props[i]

    def _true(self, f, i, nu):
        return True

    def _false(self, f, i, nu):
        return False

    def _not(self, f, i, nu):
        return not self._eval(f.arg, i, nu)

    def _and(self, f, i, nu):
        return self._eval(f.left, i, nu) and self._eval(f.right, i, nu)

    def _or(self, f, i, nu):
        return self._eval(f.left, i, nu) or self._eval(f.right, i, nu)

    def _implies(self, f, i, nu):
        return (not self._eval(f.left, i, nu)) or self._eval(f.right, i, nu)

    def _iff(self, f, i, nu):
        return self._eval(f.left, i, nu) == self._eval(f.right, i, nu)

    def _until_node(self, f, i, nu):
        return self._until(f.left, f.right, f.interval, i, nu, 1)

    def _since_node(self, f, i, nu):
        return self._until(f.left, f.right, f.interval, i, nu, -1)

    def _freeze(self, f, i, nu):
        inner = dict(nu)
        inner[f.var] = self.tau[i]
        return self._eval(f.body, i, inner)

    def _t_minus_x(self, f, i, nu):
        return self._in(f.interval, self.tau[i] - self._clock(f.var, nu))

    def _x_minus_t(self, f, i, nu):
        return self._in(f.interval, self._clock(f.var, nu) - self.tau[i])

    def _scan(self, f, i, nu, step, want):
        """Shared loop of the unary timed modalities: is some point in range ``want``?"""
        tau = self.tau
        stop = self.n + 1 if step > 0 else 0
        for j in range(i + step, stop, step):
            d = (tau[j] - tau[i]) * step
            if self._past(f.interval, d):
                break
            if self._in(f.interval, d) and self._eval(f.arg, j, nu) == want:
                return True
        return False

    def _eventually(self, f, i, nu):
        return self._scan(f, i, nu, 1, True)

    def _box(self, f, i, nu):
        return not self._scan(f, i, nu, 1, False)

    def _eventually_past(self, f, i, nu):
        return self._scan(f, i, nu, -1, True)

    def _box_past(self, f, i, nu):
        return not self._scan(f, i, nu, -1, False)

    def _next(self, f, i, nu):
        tau = self.tau
        return i < self.n and self._in(f.interval, tau[i + 1] - tau[i]) and self._eval(f.arg, i + 1, nu)

    def _prev(self, f, i, nu):
        tau = self.tau
        return i > 1 and self._in(f.interval, tau[i] - tau[i - 1]) and self._eval(f.arg, i - 1, nu)

    def _eventually_ns(self, f, i, nu):
        return any(self._eval(f.arg, j, nu) for j in range(i, self.n + 1))

    def _box_ns(self, f, i, nu):
        return all(self._eval(f.arg, j, nu) for j in range(i, self.n + 1))

    def _until_ns(self, f, i, nu):
        ev = self._eval
        return ev(f.right, i, nu) or (ev(f.left, i, nu) and self._until(f.left, f.right, None, i, nu, 1))

    def _since_ns(self, f, i, nu):
        ev = self._eval
        return ev(f.right, i, nu) or (ev(f.left, i, nu) and self._until(f.left, f.right, None, i, nu, -1))

    def _rat(self, f, i, nu):
        window = self._window(i, f.interval)
        if window is None:
            return self.empty_policy(f.automaton)
        x, y = window
        seg = [self._letter(f.formulas, z, nu) for z in range(x, y + 1)]
        return f.automaton.accepts(seg)

    def _rat_scan(self, f, i, nu, step):
        # FRat reads i+1..j forwards, PRat reads i-1 down to j
        a, tau = f.automaton, self.tau
        stop = self.n + 1 if step > 0 else 0
        states = frozenset([a.init])
        for j in range(i, stop, step):
            if j != i:
                states = a.step(states, self._letter(f.formulas, j, nu))
                if not states:
                    return False
            d = (tau[j] - tau[i]) * step
            if self._past(f.interval, d):
                return False
            if self._in(f.interval, d) and states & a.final:
                return True
        return False

    def _frat(self, f, i, nu):
        return self._rat_scan(f, i, nu, 1)

    def _prat(self, f, i, nu):
        return self._rat_scan(f, i, nu, -1)

    def _fk_node(self, f, i, nu):
        return self._fk(f, i, nu, forward=True)

    def _pk_node(self, f, i, nu):
        return self._fk(f, i, nu, forward=False)

    def _until(self, left, right, interval, i, nu, step) -> bool:
        tau = self.tau
        stop = self.n + 1 if step > 0 else 0
        for j in range(i + step, stop, step):
            d = (tau[j] - tau[i]) * step
            if self._past(interval, d):
                return False
            if self._in(interval, d) and self._eval(right, j, nu):
                return True
            if not self._eval(left, j, nu):
                return False
        return False

    def _clock(self, var, nu):
        try:
            return nu[var]
        except KeyError:
            raise EvaluationError(f"unbound freeze variable {var!r}") from None

    def _window(self, i: int, interval: Interval):
        """Positions z > i with tau_z - tau_i in interval, as (x, y) or None."""
        x = y = None
        for z in range(i + 1, self.n + 1):
            d = self.tau[z] - self.tau[i]
            if self._past(interval, d):
                break
            if self._in(interval, d):
                if x is None:
                    x = z
                y = z
        return None if x is None else (x, y)

    def _fk(self, f, i0: int, nu, forward: bool) -> bool:
        n, tau = self.n, self.tau
        step = 1 if forward else -1
        stop = n + 1 if forward else 0

        def dist(j):
            return tau[j] - tau[i0] if forward else tau[i0] - tau[j]

        frontier = {i0}
        for w, (interval, a) in enumerate(zip(f.intervals, f.automata)):
            reached = set()
            for p in sorted(frontier):
                states = frozenset([a.init])
                j = p
                while True:
                    d = dist(j)
                    if self._past(interval, d):
                        break
                    if states & a.final and self._in(interval, d):
                        reached.add(j)
                    j += step
                    if j == stop:
                        break
                    states = a.step(states, self._letter(f.formulas, j, nu))
                    if not states:
                        break
            frontier = reached
            if not frontier:
                return False
        last = f.automata[-1]
        for p in frontier:
            states = frozenset([last.init])
            for z in range(p + step, stop, step):
                states = last.step(states, self._letter(f.formulas, z, nu))
                if not states:
                    break
            if states & last.final:
                return True
        return False


_RULES = {
    Atom: Evaluator._atom, TrueF: Evaluator._true, FalseF: Evaluator._false,
    Not: Evaluator._not, And: Evaluator._and, Or: Evaluator._or,
    Implies: Evaluator._implies, Iff: Evaluator._iff,
    Until: Evaluator._until_node, Since: Evaluator._since_node,
    Freeze: Evaluator._freeze, TMinusX: Evaluator._t_minus_x, XMinusT: Evaluator._x_minus_t,
    Eventually: Evaluator._eventually, Box: Evaluator._box,
    EventuallyPast: Evaluator._eventually_past, BoxPast: Evaluator._box_past,
    Next: Evaluator._next, Prev: Evaluator._prev,
    EventuallyNS: Evaluator._eventually_ns, BoxNS: Evaluator._box_ns,
    UntilNS: Evaluator._until_ns, SinceNS: Evaluator._since_ns,
    Rat: Evaluator._rat, FRat: Evaluator._frat, PRat: Evaluator._prat,
    Fk: Evaluator._fk_node, Pk: Evaluator._pk_node,
}


def evaluate(word: TimedWord, pos: int, f: Formula, valuation: Optional[Mapping] = None,
             empty_policy: EmptyPolicy = accept_empty_word) -> bool:
    return Evaluator(word, empty_policy).holds(f, pos, valuation)


def eval_context(ctx: EvalContext, f: Formula) -> bool:
    return Evaluator(ctx.word).holds(f, ctx.pos, ctx.valuation)


def satisfies(word: TimedWord, f: Formula) -> bool:
    """Top-level satisfaction: position 1 with every free clock at 0."""
    from .formula import free_vars

    return evaluate(word, 1, f, {v: Fraction(0) for v in free_vars(f)})


def seg_plus(word: TimedWord, x: int, y: int, formulas, valuation=None) -> list:
    return Evaluator(word).letters(formulas, x, y, valuation)


def seg_minus(word: TimedWord, x: int, y: int, formulas, valuation=None) -> list:
    """Letters for positions x down to y."""
    return Evaluator(word).letters(formulas, x, y, valuation, reverse=True)


def tseg(word: TimedWord, i: int, interval: Interval, formulas, valuation=None) -> list:
    ev = Evaluator(word)
    window = ev._window(i, interval)
    if window is None:
        return []
    return ev.letters(formulas, window[0], window[1], valuation)
