"""Source-to-source rewrites: desugaring, negation normal form, the MTL to
TPTL embedding, flattening and relativization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .formula import (
    AUTOMATA_NODES, FALSE, TRUE, And, Atom, Box, BoxNS, BoxPast, Eventually,
    EventuallyNS, EventuallyPast, FalseF, Formula, FormulaError, Freeze, Iff,
    Implies, Next, Not, Or, Prev, Since, SinceNS, TMinusX, TrueF, Until, UntilNS,
    XMinusT, atoms, children, conj_chain, disj_chain, free_vars, freeze_vars,
    is_modal, with_children,
)
from .timedword import INF, Interval


def _is_unbounded(iv) -> bool:
    return iv is None or (iv.lo == 0 and iv.lo_closed and iv.hi == INF)


# -- desugaring ----------------------------------------------------------------


def desugar(f: Formula) -> Formula:
    """Rewrite derived operators into strict U/S, freeze, constraints and booleans.

    Implications and equivalences become disjunctions and conjunctions of
    disjunctions, so every operand keeps the negation parity it had.
    """
    memo = {}

    def go(g):
        key = id(g)
        if key in memo:
            return memo[key]
        kids = tuple(go(c) for c in children(g))
        if isinstance(g, Implies):
            out = Or(Not(kids[0]), kids[1])
        elif isinstance(g, Iff):
            out = And(Or(Not(kids[0]), kids[1]), Or(Not(kids[1]), kids[0]))
        elif isinstance(g, Eventually):
            out = Until(TRUE, kids[0], g.interval)
        elif isinstance(g, EventuallyPast):
            out = Since(TRUE, kids[0], g.interval)
        elif isinstance(g, Box):
            out = Not(Until(TRUE, Not(kids[0]), g.interval))
        elif isinstance(g, BoxPast):
            out = Not(Since(TRUE, Not(kids[0]), g.interval))
        elif isinstance(g, Next):
            out = Until(FALSE, kids[0], g.interval)
        elif isinstance(g, Prev):
            out = Since(FALSE, kids[0], g.interval)
        elif isinstance(g, EventuallyNS):
            out = Or(kids[0], Until(TRUE, kids[0]))
        elif isinstance(g, BoxNS):
            out = And(kids[0], Not(Until(TRUE, Not(kids[0]))))
        elif isinstance(g, UntilNS):
            out = Or(kids[1], And(kids[0], Until(kids[0], kids[1])))
        elif isinstance(g, SinceNS):
            out = Or(kids[1], And(kids[0], Since(kids[0], kids[1])))
        else:
            out = with_children(g, kids) if kids != children(g) else g
        memo[key] = out
        return out

    return go(f)


# -- MTL into TPTL ---------------------------------------------------------------


def _fresh_var(taken) -> str:
    for name in ("x", "y", "z"):
        if name not in taken:
            return name
    k = 1
    while f"x{k}" in taken:
        k += 1
    return f"x{k}"


def embed_mtl(f: Formula, var: str | None = None) -> Formula:
    """Replace each timed ``a U_I b`` by ``x.(a U (b & T-x in I))`` (``x-T`` for S).

    The clock name is the formula's own single clock when it has one; a fresh
    name is used wherever an operand mentions the chosen clock freely.
    """
    f = desugar(f)
    if var is None:
        names = freeze_vars(f)
        var = sorted(names)[0] if len(names) == 1 else _fresh_var(names | atoms(f))
    memo = {}

    def go(g):
        key = id(g)
        if key in memo:
            return memo[key]
        kids = tuple(go(c) for c in children(g))
        if isinstance(g, (Until, Since)) and not _is_unbounded(g.interval):
            left, right = kids
            clock = var
            if clock in free_vars(left) | free_vars(right):
                clock = _fresh_var(freeze_vars(g) | free_vars(g) | atoms(g) | {var})
            if isinstance(g, Until):
                out = Freeze(clock, Until(left, And(right, TMinusX(clock, g.interval))))
            else:
                out = Freeze(clock, Since(left, And(right, XMinusT(clock, g.interval))))
        elif isinstance(g, (Until, Since)) and g.interval is not None:
            out = type(g)(kids[0], kids[1])
        else:
            out = with_children(g, kids) if kids != children(g) else g
        memo[key] = out
        return out

    return go(f)


# -- negation normal form -----------------------------------------------------------


def complement_constraint(g) -> Formula:
    """Negated ``T-x in I`` as a disjunction of constraints on the two sides of I."""
    cls, iv = type(g), g.interval
    parts = []
    if iv.lo != -INF:
        parts.append(cls(g.var, Interval(-INF, iv.lo, False, not iv.lo_closed)))
    if iv.hi != INF:
        parts.append(cls(g.var, Interval(iv.hi, INF, not iv.hi_closed, False)))
    return disj_chain(parts) if parts else FALSE


def to_nnf(f: Formula) -> Formula:
    """Negation normal form over the TPTL grammar (negation only on atoms)."""
    for g in _walk_ids(f):
        if isinstance(g, AUTOMATA_NODES):
            raise FormulaError("negation normal form is defined for TPTL formulas only")
    core = embed_mtl(f)
    memo = {}

    def go(g, neg):
        key = (id(g), neg)
        if key in memo:
            return memo[key]
        out = _nnf_step(g, neg, go)
        memo[key] = out
        return out

    return go(core, False)


def _walk_ids(f):
    from .formula import walk

    return walk(f)


def _nnf_step(g, neg, go) -> Formula:
    if isinstance(g, Atom):
        return Not(g) if neg else g
    if isinstance(g, TrueF):
        return FALSE if neg else TRUE
    if isinstance(g, FalseF):
        return TRUE if neg else FALSE
    if isinstance(g, Not):
        return go(g.arg, not neg)
    if isinstance(g, And):
        return (Or if neg else And)(go(g.left, neg), go(g.right, neg))
    if isinstance(g, Or):
        return (And if neg else Or)(go(g.left, neg), go(g.right, neg))
    if isinstance(g, Freeze):
        return Freeze(g.var, go(g.body, neg))
    if isinstance(g, (TMinusX, XMinusT)):
        return complement_constraint(g) if neg else g
    if isinstance(g, (Until, Since)):
        box = Box if isinstance(g, Until) else BoxPast
        if not neg:
            return type(g)(go(g.left, False), go(g.right, False))
        not_right = go(g.right, True)
        if isinstance(g.left, TrueF):
            return box(not_right)
        return Or(box(not_right), type(g)(not_right, And(go(g.left, True), not_right)))
    if isinstance(g, (Box, BoxPast)) and g.interval is None:
        if not neg:
            return type(g)(go(g.arg, False))
        until = Until if isinstance(g, Box) else Since
        return until(TRUE, go(g.arg, True))
    raise FormulaError(f"unexpected node {type(g).__name__} in negation normal form")


def is_nnf(f: Formula) -> bool:
    """Structural check against the TPTL negation-normal-form grammar."""
    from .formula import walk

    for g in walk(f):
        if isinstance(g, Not):
            if not isinstance(g.arg, Atom):
                return False
        elif isinstance(g, (Until, Since)):
            if g.interval is not None:
                return False
        elif isinstance(g, (Box, BoxPast)):
            if g.interval is not None:
                return False
        elif not isinstance(g, (Atom, TrueF, FalseF, And, Or, Freeze, TMinusX, XMinusT)):
            return False
    return True


# -- flattening -------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatteningResult:
    main: Formula
    definitions: tuple  # of (witness name, defining formula)
    witnesses: frozenset
    sigma: frozenset = field(default_factory=frozenset)

    def temporal_definitions(self) -> list:
        return [BoxNS(Iff(Atom(b), beta)) for b, beta in self.definitions]

    def formula(self) -> Formula:
        """``main & T_1 & ... & T_m & Gns(\\/ Sigma)``."""
        parts = [self.main] + self.temporal_definitions()
        parts.append(BoxNS(disj_chain(Atom(p) for p in sorted(self.sigma))))
        return conj_chain(parts)


def flatten(f: Formula, sigma: Iterable[str]) -> FlatteningResult:
    """Replace every modal subformula nested under another modality by a witness.

    Witnesses are numbered in pre-order (outermost first) and a repeated
    subformula reuses its witness.
    """
    sigma = frozenset(sigma)
    for g in _walk_ids(f):
        if isinstance(g, (Freeze, TMinusX, XMinusT)):
            raise FormulaError("flattening is defined for formulas without freeze quantifiers")
    taken = set(sigma) | atoms(f)
    witness_of = {}
    definitions = []
    counter = [0]

    def fresh():
        while True:
            counter[0] += 1
            name = f"w{counter[0]}"
            if name not in taken:
                taken.add(name)
                return name

    pending = []

    def replace(g, under_modal):
        """Rewrite g; modal nodes below another modal become witnesses."""
        if is_modal(g) and under_modal:
            name = witness_of.get(g)
            if name is None:
                name = fresh()
                witness_of[g] = name
                slot = len(definitions)
                definitions.append(None)
                pending.append((slot, name, g))
            return Atom(name)
        kids = children(g)
        if not kids:
            return g
        inner = under_modal or is_modal(g)
        new = tuple(replace(c, inner) for c in kids)
        return with_children(g, new) if new != kids else g

    main = replace(f, False)
    while pending:
        slot, name, g = pending.pop(0)
        body = with_children(g, tuple(replace(c, True) for c in children(g)))
        definitions[slot] = (name, body)
    return FlatteningResult(main, tuple(definitions), frozenset(witness_of.values()), sigma)


# -- relativization -----------------------------------------------------------------------


def act(sigma: Iterable[str]) -> Formula:
    return disj_chain(Atom(p) for p in sorted(sigma))


def relativize(sigma: Iterable[str], f: Formula) -> Formula:
    """Restrict every modality of ``f`` to action points (where some sigma holds)."""
    guard = act(sigma)
    memo = {}

    def go(g):
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, (Next, Prev, UntilNS, SinceNS, EventuallyNS, BoxNS)):
            out = go(desugar(g))
        elif isinstance(g, AUTOMATA_NODES):
            raise FormulaError("relativization is defined for MTL/TPTL formulas")
        elif isinstance(g, (Until, Since)):
            out = type(g)(Implies(guard, go(g.left)), And(guard, go(g.right)), g.interval)
        elif isinstance(g, (Eventually, EventuallyPast)):
            out = type(g)(And(guard, go(g.arg)), g.interval)
        elif isinstance(g, (Box, BoxPast)):
            out = type(g)(Implies(guard, go(g.arg)), g.interval)
        else:
            kids = tuple(go(c) for c in children(g))
            out = with_children(g, kids) if kids != children(g) else g
        memo[key] = out
        return out

    return go(f)
