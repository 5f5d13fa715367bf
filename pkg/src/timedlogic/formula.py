"""Formula AST shared by MTL, TPTL, RatMTL and PnEMTL.

Nodes are frozen dataclasses; functions dispatch on node type.  A temporal
node whose ``interval`` is None is the untimed modality.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator, Optional, Tuple

from .automata import SymbolicNFA
from .timedword import Interval


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        from .syntax import to_text

        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class Since(Formula):
    left: Formula
    right: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class Freeze(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class TMinusX(Formula):
    """Clock constraint ``T - x in I``."""

    var: str
    interval: Interval


@dataclass(frozen=True)
class XMinusT(Formula):
    """Clock constraint ``x - T in I``."""

    var: str
    interval: Interval


# sugar


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class EventuallyPast(Formula):
    arg: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class Box(Formula):
    arg: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class BoxPast(Formula):
    arg: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class Prev(Formula):
    arg: Formula
    interval: Optional[Interval] = None


@dataclass(frozen=True)
class UntilNS(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class SinceNS(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EventuallyNS(Formula):
    arg: Formula


@dataclass(frozen=True)
class BoxNS(Formula):
    arg: Formula


# automata modalities; ``formulas`` is a tuple of (name, Formula) pairs whose
# names form the automaton's formula set


@dataclass(frozen=True)
class Rat(Formula):
    interval: Interval
    automaton: SymbolicNFA
    formulas: Tuple[Tuple[str, Formula], ...]

    def __post_init__(self):
        _normalize_pairs(self)
        _check_formula_set(self.formulas, (self.automaton,))


@dataclass(frozen=True)
class FRat(Formula):
    interval: Interval
    automaton: SymbolicNFA
    formulas: Tuple[Tuple[str, Formula], ...]

    def __post_init__(self):
        _normalize_pairs(self)
        _check_formula_set(self.formulas, (self.automaton,))


@dataclass(frozen=True)
class PRat(Formula):
    interval: Interval
    automaton: SymbolicNFA
    formulas: Tuple[Tuple[str, Formula], ...]

    def __post_init__(self):
        _normalize_pairs(self)
        _check_formula_set(self.formulas, (self.automaton,))


@dataclass(frozen=True)
class Fk(Formula):
    intervals: Tuple[Interval, ...]
    automata: Tuple[SymbolicNFA, ...]
    formulas: Tuple[Tuple[str, Formula], ...]

    def __post_init__(self):
        _check_arity(self)


@dataclass(frozen=True)
class Pk(Formula):
    intervals: Tuple[Interval, ...]
    automata: Tuple[SymbolicNFA, ...]
    formulas: Tuple[Tuple[str, Formula], ...]

    def __post_init__(self):
        _check_arity(self)


class FormulaError(ValueError):
    pass


def _normalize_pairs(node):
    object.__setattr__(node, "formulas", tuple((str(n), g) for n, g in node.formulas))


def _check_formula_set(formulas, automata):
    names = [n for n, _ in formulas]
    if len(set(names)) != len(names):
        raise FormulaError("duplicate names in a formula set")
    for a in automata:
        if a.formula_set != frozenset(names):
            raise FormulaError(
                "automaton alphabet {%s} does not match formula set {%s}"
                % (",".join(sorted(a.formula_set)), ",".join(sorted(names)))
            )


def _check_arity(node):
    object.__setattr__(node, "intervals", tuple(node.intervals))
    object.__setattr__(node, "automata", tuple(node.automata))
    _normalize_pairs(node)
    if len(node.intervals) < 1:
        raise FormulaError("an automata modality needs at least one interval")
    if len(node.automata) != len(node.intervals) + 1:
        raise FormulaError(
            f"arity {len(node.intervals)} needs {len(node.intervals) + 1} automata, "
            f"got {len(node.automata)}"
        )
    _check_formula_set(node.formulas, node.automata)


AUTOMATA_NODES = (Rat, FRat, PRat, Fk, Pk)
BINARY = (And, Or, Implies, Iff)
TEMPORAL_BINARY = (Until, Since, UntilNS, SinceNS)
UNARY_TEMPORAL = (Eventually, EventuallyPast, Box, BoxPast, Next, Prev, EventuallyNS, BoxNS)
SUGAR = (Implies, Iff, Eventually, EventuallyPast, Box, BoxPast, Next, Prev,
         UntilNS, SinceNS, EventuallyNS, BoxNS)


# -- traversal -----------------------------------------------------------------


def children(f: Formula) -> tuple:
    if isinstance(f, (Atom, TrueF, FalseF, TMinusX, XMinusT)):
        return ()
    if isinstance(f, Not) or isinstance(f, UNARY_TEMPORAL):
        return (f.arg,)
    if isinstance(f, BINARY) or isinstance(f, TEMPORAL_BINARY):
        return (f.left, f.right)
    if isinstance(f, Freeze):
        return (f.body,)
    if isinstance(f, AUTOMATA_NODES):
        return tuple(g for _, g in f.formulas)
    raise FormulaError(f"unknown node {type(f).__name__}")


def with_children(f: Formula, new: tuple) -> Formula:
    """Rebuild ``f`` with ``new`` children (same order as :func:`children`)."""
    if not new:
        return f
    if isinstance(f, Not):
        return Not(new[0])
    if isinstance(f, UNARY_TEMPORAL):
        if isinstance(f, (EventuallyNS, BoxNS)):
            return type(f)(new[0])
        return type(f)(new[0], f.interval)
    if isinstance(f, BINARY) or isinstance(f, (UntilNS, SinceNS)):
        return type(f)(new[0], new[1])
    if isinstance(f, (Until, Since)):
        return type(f)(new[0], new[1], f.interval)
    if isinstance(f, Freeze):
        return Freeze(f.var, new[0])
    if isinstance(f, (Rat, FRat, PRat)):
        pairs = tuple((n, g) for (n, _), g in zip(f.formulas, new))
        return type(f)(f.interval, f.automaton, pairs)
    if isinstance(f, (Fk, Pk)):
        pairs = tuple((n, g) for (n, _), g in zip(f.formulas, new))
        return type(f)(f.intervals, f.automata, pairs)
    raise FormulaError(f"unknown node {type(f).__name__}")


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal (iterative, so deep formulas are fine)."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


def atoms(f: Formula) -> frozenset:
    return frozenset(n.name for n in walk(f) if isinstance(n, Atom))


def free_vars(f: Formula) -> frozenset:
    memo = {}

    def go(g):
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, (TMinusX, XMinusT)):
            res = frozenset([g.var])
        elif isinstance(g, Freeze):
            res = go(g.body) - {g.var}
        else:
            res = frozenset().union(*(go(c) for c in children(g))) if children(g) else frozenset()
        memo[key] = res
        return res

    return go(f)


def freeze_vars(f: Formula) -> frozenset:
    names = set()
    for g in walk(f):
        if isinstance(g, Freeze):
            names.add(g.var)
        elif isinstance(g, (TMinusX, XMinusT)):
            names.add(g.var)
    return frozenset(names)


def is_modal(f: Formula) -> bool:
    return isinstance(f, TEMPORAL_BINARY + UNARY_TEMPORAL + AUTOMATA_NODES)


# -- builders ----------------------------------------------------------------------


def conj(items) -> Formula:
    """Balanced conjunction (keeps recursion depth logarithmic); empty is True."""
    items = list(items)
    if not items:
        return TRUE
    while len(items) > 1:
        items = [And(items[i], items[i + 1]) if i + 1 < len(items) else items[i]
                 for i in range(0, len(items), 2)]
    return items[0]


def disj(items) -> Formula:
    items = list(items)
    if not items:
        return FALSE
    while len(items) > 1:
        items = [Or(items[i], items[i + 1]) if i + 1 < len(items) else items[i]
                 for i in range(0, len(items), 2)]
    return items[0]


def conj_chain(items) -> Formula:
    """Left-nested conjunction, matching how a reader writes ``a & b & c``."""
    items = list(items)
    if not items:
        return TRUE
    out = items[0]
    for g in items[1:]:
        out = And(out, g)
    return out


def disj_chain(items) -> Formula:
    items = list(items)
    if not items:
        return FALSE
    out = items[0]
    for g in items[1:]:
        out = Or(out, g)
    return out


def conjuncts(f: Formula) -> list:
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def node_fields(f: Formula) -> dict:
    return {fl.name: getattr(f, fl.name) for fl in fields(f)}
