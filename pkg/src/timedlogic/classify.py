"""Syntactic fragment classifiers (MTL family, openness, adjacency)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .formula import (
    AUTOMATA_NODES, And, Atom, FalseF, Fk, Formula, Freeze, Not, Or, Pk, Since,
    TMinusX, TrueF, Until, XMinusT, children, freeze_vars, walk,
)
from .timedword import Interval, set_nonadjacency
from .transform import desugar, embed_mtl, to_nnf


@dataclass(frozen=True)
class FragmentReport:
    is_mtl: bool
    is_mitl: bool
    is_mtl_future_only: bool
    is_pmtl: bool
    is_tptl: bool
    is_1tptl: bool
    is_open_tptl: bool
    is_na_1tptl: bool
    is_na_plus: bool
    is_na_minus: bool
    is_pa_1tptl: bool
    pnemtl_adjacency: str
    scopes: tuple = field(default=())  # (scope label, tuple of interval strings)

    def lines(self) -> list:
        out = []
        for key, value in asdict(self).items():
            if key == "scopes":
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            out.append(f"{key}={value}")
        for label, ivs in self.scopes:
            out.append(f"scope {label}: {' '.join(ivs) if ivs else '-'}")
        return out

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def to_json(self) -> str:
        data = asdict(self)
        data["scopes"] = [{"scope": s, "intervals": list(ivs)} for s, ivs in self.scopes]
        return json.dumps(data, sort_keys=True)


def _has(f, kinds) -> bool:
    return any(isinstance(g, kinds) for g in walk(f))


def _timed_modalities(core):
    """(kind, interval) for every timed U/S node of a desugared formula."""
    for g in walk(core):
        if isinstance(g, (Until, Since)) and g.interval is not None:
            yield ("U" if isinstance(g, Until) else "S"), g.interval


def openness_ok(f: Formula) -> bool:
    """Constraints (and modality intervals) under an even number of negations
    must be open, under an odd number closed."""
    core = desugar(f)
    stack = [(core, 0)]
    seen = set()
    while stack:
        g, parity = stack.pop()
        key = (id(g), parity)
        if key in seen:
            continue
        seen.add(key)
        iv = None
        if isinstance(g, (TMinusX, XMinusT)):
            iv = g.interval
        elif isinstance(g, (Until, Since)):
            iv = g.interval
        if iv is not None:
            if parity == 0 and not iv.is_open:
                return False
            if parity == 1 and not iv.is_closed:
                return False
        step = 1 if isinstance(g, Not) else 0
        stack.extend((c, parity ^ step) for c in children(g))
    return True


def _normalized(g) -> Interval:
    # x - T in I is T - x in -I
    return g.interval if isinstance(g, TMinusX) else g.interval.negate()


def freeze_scopes(nnf: Formula) -> list:
    """Group constraint intervals by their innermost enclosing freeze.

    Returns ``[(label, [Interval, ...]), ...]`` with the root scope first and
    freezes labelled ``x#k`` in pre-order.
    """
    groups = [("root", [])]
    counter = {}
    stack = [(nnf, 0)]
    while stack:
        g, scope = stack.pop()
        if isinstance(g, Freeze):
            counter[g.var] = counter.get(g.var, 0) + 1
            groups.append((f"{g.var}#{counter[g.var]}", []))
            scope = len(groups) - 1
        elif isinstance(g, (TMinusX, XMinusT)):
            iv = _normalized(g)
            if iv not in groups[scope][1]:
                groups[scope][1].append(iv)
        stack.extend((c, scope) for c in reversed(children(g)))
    return groups


def pnemtl_adjacency(f: Formula) -> str:
    allowed = (Atom, TrueF, FalseF, Not, And, Or, Fk, Pk)
    nodes = list(walk(f))
    if not all(isinstance(g, allowed) for g in nodes):
        return "not_pnemtl"
    f_ok = all(set_nonadjacency("plain", g.intervals) for g in nodes if isinstance(g, Fk))
    p_ok = all(set_nonadjacency("plain", g.intervals) for g in nodes if isinstance(g, Pk))
    if f_ok and p_ok:
        return "na"
    if f_ok:
        return "na_plus"
    if p_ok:
        return "na_minus"
    return "none"


def classify(f: Formula) -> FragmentReport:
    is_tptl = not _has(f, AUTOMATA_NODES)
    clocks = _has(f, (Freeze, TMinusX, XMinusT))
    is_mtl = is_tptl and not clocks
    core = desugar(f)
    timed = list(_timed_modalities(core))
    punctual = [kind for kind, iv in timed if iv.is_punctual]
    is_mitl = is_mtl and not punctual
    is_future = is_mtl and not _has(core, Since)
    is_pmtl = is_mtl and len(set(punctual)) <= 1

    is_1tptl = False
    scopes = []
    na = na_plus = na_minus = False
    if is_tptl:
        embedded = embed_mtl(f)
        is_1tptl = len(freeze_vars(embedded)) <= 1
        nnf = to_nnf(f)
        groups = freeze_scopes(nnf)
        scopes = tuple((label, tuple(str(iv) for iv in ivs)) for label, ivs in groups)
        if is_1tptl:
            na = all(set_nonadjacency("plain", ivs) for _, ivs in groups)
            na_plus = all(set_nonadjacency("positive", ivs) for _, ivs in groups)
            na_minus = all(set_nonadjacency("negative", ivs) for _, ivs in groups)
    is_open = is_1tptl and openness_ok(f)
    return FragmentReport(
        is_mtl=is_mtl,
        is_mitl=is_mitl,
        is_mtl_future_only=is_future,
        is_pmtl=is_pmtl,
        is_tptl=is_tptl,
        is_1tptl=is_1tptl,
        is_open_tptl=is_open,
        is_na_1tptl=na,
        is_na_plus=na_plus,
        is_na_minus=na_minus,
        is_pa_1tptl=na_plus or na_minus,
        pnemtl_adjacency=pnemtl_adjacency(f),
        scopes=tuple(scopes),
    )
