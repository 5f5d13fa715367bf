"""Formula-to-formula translations between automata modalities, and
executable checks of equisatisfiability modulo projections."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import automata as am
from .evaluator import satisfies
from .formula import (
    FALSE, And, Atom, Box, BoxNS, BoxPast, Eventually, EventuallyPast, Fk, Formula, FRat, Iff,
    Implies, Not, Or, Rat, Since, Until, children, conj_chain, disj_chain, size,
    with_children,
)
from .timedword import (
    INF, Interval, TimedWord, enumerate_words, format_word, is_oversampled_behaviour,
    is_simple_behaviour, project_oversampled, project_simple,
)
from .transform import FlatteningResult, act, desugar


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionReport:
    input: Formula
    output: Formula
    witness_states: tuple = ()
    size_stats: dict = field(default_factory=dict)

    def summary(self) -> str:
        stats = " ".join(f"{k}={v}" for k, v in sorted(self.size_stats.items()))
        return stats


# -- U through FRat ------------------------------------------------------------------


def until_via_frat(f: Until) -> FRat:
    """``a U_I b`` as ``FRat_I(({f1}+{f1,f2})*.({f2}+{f1,f2}))`` over f1:=a, f2:=b."""
    if not isinstance(f, Until):
        raise ReductionError("until_via_frat expects an Until node")
    names = ("f1", "f2")
    automaton = am.compile_regex("({f1}+{f1,f2})*.({f2}+{f1,f2})", names)
    interval = f.interval if f.interval is not None else Interval(0, INF, True, False)
    return FRat(interval, automaton, (("f1", f.left), ("f2", f.right)))


# -- F^k to Rat ------------------------------------------------------------------------


def _regions(intervals):
    """Split [0, inf) into maximal convex pieces on which membership in every
    interval is constant.  Returns [(Interval, frozenset of 1-based indices)]."""
    points = sorted({0} | {e for iv in intervals for e in (iv.lo, iv.hi) if e not in (INF, -INF) and e >= 0})
    atoms = []
    for idx, e in enumerate(points):
        atoms.append(Interval(e, e))
        nxt = points[idx + 1] if idx + 1 < len(points) else INF
        atoms.append(Interval(e, nxt, False, False))
    # midpoints decide membership for open atoms
    def rep(a):
        if a.is_punctual:
            return Fraction(a.lo)
        if a.hi == INF:
            return Fraction(a.lo) + 1
        return Fraction(a.lo + a.hi, 2)

    labelled = []
    for a in atoms:
        v = rep(a)
        cover = frozenset(w for w, iv in enumerate(intervals, start=1) if v in iv)
        labelled.append((a, cover))
    merged = []
    for a, cover in labelled:
        if merged and merged[-1][1] == cover:
            prev, _ = merged[-1]
            merged[-1] = (Interval(prev.lo, a.hi, prev.lo_closed, a.hi_closed), cover)
        else:
            merged.append((a, cover))
    return merged


def _nonempty(a: am.SymbolicNFA) -> am.SymbolicNFA:
    """Same language minus the empty word."""
    fresh = "new"
    while fresh in a.states:
        fresh += "_"
    extra = {(fresh, let, dst) for src, let, dst in a.transitions if src == a.init}
    return am.trim(am.SymbolicNFA(a.formula_set, (fresh,) + a.states, fresh, a.final,
                                  set(a.transitions) | extra))


def check_fk_preconditions(f) -> None:
    for idx, iv in enumerate(f.intervals, start=1):
        if not iv.is_closed or iv.hi == INF:
            raise ReductionError(
                f"interval I{idx}={iv} is not a closed bounded interval [l,u]; "
                "pass allow_general=True to use the generalized construction"
            )
    for idx in range(len(f.intervals) - 1):
        a, b = f.intervals[idx], f.intervals[idx + 1]
        if a.hi > b.lo:
            raise ReductionError(
                f"intervals are not sorted: sup(I{idx + 1})={a.hi} > inf(I{idx + 2})={b.lo}"
            )


def fk_to_rat(f: Fk, allow_general: bool = False, factored: bool = True) -> Formula:
    return fk_to_rat_report(f, allow_general, factored).output


def fk_to_rat_report(f: Fk, allow_general: bool = False, factored: bool = True) -> ReductionReport:
    """Translate ``F^k_{I1..Ik}(A1..Ak+1)(S)`` into a boolean combination of Rat.

    The distance axis from the anchor point is cut into regions (for sorted
    closed intervals: [0,l1), [l1,u1], (u1,l2), ..., (uk,inf)).  At every
    region boundary a configuration (phase p, state q) records which automaton
    is reading and where it is; the Rat conjunct of a region checks that the
    block of points inside it leads from one configuration to the next,
    possibly passing through cut points i_p whose distance lies in I_p.
    ``factored`` shares the tail of the disjunction per configuration instead
    of listing every configuration sequence.
    """
    if not isinstance(f, Fk):
        raise ReductionError("fk_to_rat expects an Fk node")
    if not allow_general:
        check_fk_preconditions(f)
    k = len(f.intervals)
    auts = f.automata
    regions = _regions(f.intervals)
    lang_cache = {}
    rat_cache = {}

    def seg_language(r, cfg, nxt):
        """Words read inside region r moving configuration cfg to nxt (or None)."""
        key = (r, cfg, nxt)
        if key in lang_cache:
            return lang_cache[key]
        (p, q), (p2, q2) = cfg, nxt
        _, cover = regions[r]
        last = r == len(regions) - 1
        result = None
        if p2 >= p and all(w in cover for w in range(p, p2)):
            target = None if (last and p2 == k + 1 and q2 == "*") else q2
            if p2 == p:
                result = am.rewire(auts[p - 1], q, target)
            else:
                head = am.rewire(auts[p - 1], q, None)
                # a cut strictly inside this block needs a nonempty first factor,
                # except the anchor itself, which lies in the first region
                if not (r == 0 and p == 1 and q == auts[0].init):
                    head = _nonempty(head)
                parts = [head]
                for w in range(p + 1, p2):
                    parts.append(am.rewire(auts[w - 1], auts[w - 1].init, None))
                parts.append(am.rewire(auts[p2 - 1], auts[p2 - 1].init, target))
                result = am.concat_all(parts)
            result = am.trim(result)
            if result.is_empty():
                result = None
        lang_cache[key] = result
        return result

    def rat(r, language):
        key = (r, language)
        if key not in rat_cache:
            rat_cache[key] = Rat(regions[r][0], language, f.formulas)
        return rat_cache[key]

    configs = [(p, q) for p in range(1, k + 2) for q in auts[p - 1].states]
    start = (1, auts[0].init)
    last_r = len(regions) - 1
    tail = {}

    def finish(r, cfg):
        """Disjunction over completions from configuration cfg at the start of region r."""
        key = (r, cfg)
        if key in tail:
            return tail[key]
        options = []
        if r == last_r:
            lang = seg_language(r, cfg, (k + 1, "*"))
            if lang is not None:
                options.append([rat(r, lang)])
        else:
            for nxt in configs:
                lang = seg_language(r, cfg, nxt)
                if lang is None:
                    continue
                for rest in finish(r + 1, nxt):
                    options.append([rat(r, lang)] + rest)
        tail[key] = options
        return options

    def finish_factored(r, cfg, memo={}):
        key = (r, cfg)
        if key in memo:
            return memo[key]
        if r == last_r:
            lang = seg_language(r, cfg, (k + 1, "*"))
            out = FALSE if lang is None else rat(r, lang)
        else:
            branches = []
            for nxt in configs:
                lang = seg_language(r, cfg, nxt)
                if lang is None:
                    continue
                rest = finish_factored(r + 1, nxt, memo)
                if rest == FALSE:
                    continue
                branches.append(And(rat(r, lang), rest))
            out = disj_chain(branches)
        memo[key] = out
        return out

    if factored:
        output = finish_factored(0, start, {})
        count = _count_sequences(output)
    else:
        options = finish(0, start)
        output = disj_chain(conj_chain(opt) for opt in options)
        count = len(options)
    stats = {
        "regions": len(regions),
        "disjuncts": count,
        "rat_nodes": len(rat_cache),
        "size": size(output),
        "bound": _product_bound(auts),
    }
    windows = tuple(str(iv) for iv, _ in regions)
    return ReductionReport(f, output, windows, stats)


def _product_bound(auts) -> int:
    """Number of (q''_1..q''_k, q'_2..q'_k+1) state tuples before pruning."""
    out = 1
    for a in auts[:-1]:
        out *= len(a.states)
    for a in auts[1:]:
        out *= len(a.states)
    return out


def _count_sequences(f) -> int:
    memo = {}

    def go(g):
        if id(g) in memo:
            return memo[id(g)]
        if isinstance(g, Or):
            res = go(g.left) + go(g.right)
        elif isinstance(g, And):
            res = go(g.left) * go(g.right)
        elif g == FALSE:
            res = 0
        else:
            res = 1
        memo[id(g)] = res
        return res

    return go(f)


def fk_windows(f: Fk) -> list:
    """The Rat windows used by :func:`fk_to_rat` for ``f``."""
    return [iv for iv, _ in _regions(f.intervals)]


# -- Rat to F^k ----------------------------------------------------------------------


def _before(iv: Interval) -> Optional[Interval]:
    if iv.lo == 0 and iv.lo_closed:
        return None
    if iv.lo_closed:
        return Interval(0, iv.lo, True, False)
    return Interval(0, iv.lo, True, True)


def _after(iv: Interval) -> Optional[Interval]:
    if iv.hi == INF:
        return None
    if iv.hi_closed:
        return Interval(iv.hi, INF, False, False)
    return Interval(iv.hi, INF, True, False)


def rat_to_fk(f: Rat, allow_general: bool = False) -> Formula:
    """Translate ``Rat_I(A)(S)`` into a boolean combination of F^k (k <= 4).

    With B the distances before I and A the distances after it:

    * C1, some point after the anchor lies in B: the last such point i1 is
      followed by the first window point i2 (letter c), the window ends at
      i3 with the rest in the left quotient of A by c, and i3 is either the
      last point of the word or followed by a point in the after-region.
    * C2, no point after the anchor lies in B: the next point starts the
      window, same tail as C1.
    * E, no point in the window: A accepts the empty word.
    """
    if not isinstance(f, Rat):
        raise ReductionError("rat_to_fk expects a Rat node")
    iv = f.interval
    if not allow_general and not (iv.is_closed and iv.hi != INF):
        raise ReductionError(
            f"interval {iv} is not a closed bounded interval [l,u]; "
            "pass allow_general=True to use the generalized construction"
        )
    if iv.lo < 0:
        raise ReductionError(f"interval {iv} has a negative lower bound")
    a = f.automaton
    fs = a.formula_set
    before, after = _before(iv), _after(iv)
    plus = am.nonempty_words(fs)
    univ = am.universal(fs)
    eps = am.epsilon_only(fs)
    anyone = am.letters_automaton(fs, am.all_letters(fs))

    def fk(intervals, automata):
        return Fk(tuple(intervals), tuple(automata), f.formulas)

    def tail_options(prefix_ivs, prefix_auts):
        opts = []
        for c in am.all_letters(fs):
            quotient = am.left_quotient(a, c)
            if quotient.is_empty():
                continue
            first = am.letters_automaton(fs, [c])
            ivs = prefix_ivs + [iv, iv]
            auts = prefix_auts + [first, quotient]
            if after is not None:
                opts.append(fk(ivs + [after], auts + [anyone, univ]))
            opts.append(fk(ivs, auts + [eps]))
        return opts

    branches = []
    if before is not None:
        branches.extend(tail_options([before], [plus]))
        c2_guard = Not(fk([before], [plus, univ]))
    else:
        c2_guard = None
    c2 = disj_chain(tail_options([], []))
    if c2 != FALSE:
        branches.append(c2 if c2_guard is None else And(c2_guard, c2))
    if a.accepts_empty:
        branches.append(Not(fk([iv], [plus, univ])))
    return disj_chain(branches)


def map_nodes(f: Formula, kind, fn) -> Formula:
    """Rewrite every node of type ``kind`` bottom-up with ``fn``."""
    memo = {}

    def go(g):
        if id(g) in memo:
            return memo[id(g)]
        kids = children(g)
        new = tuple(go(c) for c in kids)
        h = with_children(g, new) if new != kids else g
        if isinstance(h, kind):
            h = fn(h)
        memo[id(g)] = h
        return h

    return go(f)


def eliminate_rat(f: Formula) -> Formula:
    return map_nodes(f, Rat, lambda g: rat_to_fk(g, allow_general=True))


def eliminate_fk(f: Formula) -> Formula:
    return map_nodes(f, Fk, lambda g: fk_to_rat(g, allow_general=True))


# -- equisatisfiability harnesses ----------------------------------------------------------

DEFAULT_GRID = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))


@dataclass(frozen=True)
class EquisatReport:
    ok: bool
    kind: str
    words_checked: int
    psi_models: int
    phi_models: int
    clause: Optional[int] = None
    reason: str = ""
    counterexample: Optional[TimedWord] = None
    projection: Optional[TimedWord] = None

    def to_text(self) -> str:
        lines = [
            f"harness={self.kind}",
            f"result={'OK' if self.ok else 'COUNTEREXAMPLE'}",
            f"words={self.words_checked} psi_models={self.psi_models} phi_models={self.phi_models}",
        ]
        if not self.ok:
            lines.append(f"clause={self.clause}: {self.reason}")
            lines.append("word:")
            lines.append(format_word(self.counterexample).rstrip("\n"))
            if self.projection is not None:
                lines.append("projection:")
                lines.append(format_word(self.projection).rstrip("\n"))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        data = {
            "harness": self.kind, "ok": self.ok, "words": self.words_checked,
            "psi_models": self.psi_models, "phi_models": self.phi_models,
        }
        if not self.ok:
            data["clause"] = self.clause
            data["reason"] = self.reason
            data["word"] = format_word(self.counterexample)
            if self.projection is not None:
                data["projection"] = format_word(self.projection)
        return json.dumps(data, sort_keys=True)


def _check_disjoint(sigma, hidden):
    if sigma & hidden:
        raise ReductionError(f"Sigma and X overlap: {sorted(sigma & hidden)}")


def _verify(phi, psi, sigma, hidden, max_len, grid, oversampled):
    sigma, hidden = frozenset(sigma), frozenset(hidden)
    _check_disjoint(sigma, hidden)
    kind = "oversampled" if oversampled else "simple"
    projections = set()
    phi_models = []
    checked = psi_count = 0
    for w in enumerate_words(sorted(sigma | hidden), max_len, grid):
        checked += 1
        if satisfies(w, psi):
            psi_count += 1
            if oversampled:
                if not is_oversampled_behaviour(w, hidden):
                    continue  # clause 1 only speaks about oversampled behaviours
                proj = project_oversampled(w, hidden)
            else:
                if not is_simple_behaviour(w, hidden):
                    return EquisatReport(False, kind, checked, psi_count, len(phi_models), 1,
                                         "model of psi is not a simple behaviour", w)
                proj = project_simple(w, hidden)
            if not satisfies(proj, phi):
                return EquisatReport(False, kind, checked, psi_count, len(phi_models), 1,
                                     "projection of a psi-model falsifies phi", w, proj)
            projections.add(proj)
        if w.alphabet <= sigma and satisfies(w, phi):
            phi_models.append(w)
    for m in phi_models:
        if m not in projections:
            return EquisatReport(False, kind, checked, psi_count, len(phi_models), 2,
                                 "phi-model without an enumerated psi-extension", m)
    return EquisatReport(True, kind, checked, psi_count, len(phi_models))


def verify_simple_equisat(phi, psi, sigma, hidden, max_len: int = 3, grid=DEFAULT_GRID) -> EquisatReport:
    return _verify(phi, psi, sigma, hidden, max_len, grid, oversampled=False)


def verify_oversampled_equisat(phi, psi, sigma, hidden, max_len: int = 3, grid=DEFAULT_GRID) -> EquisatReport:
    return _verify(phi, psi, sigma, hidden, max_len, grid, oversampled=True)


# -- mutations used to test the harnesses ------------------------------------------------


def polarities(f: Formula, name: str) -> set:
    """Signs (+1/-1) under which atom ``name`` occurs in ``f``."""
    out = set()
    stack = [(desugar(f), 1)]
    while stack:
        g, sign = stack.pop()
        if isinstance(g, Atom) and g.name == name:
            out.add(sign)
        elif isinstance(g, Not):
            stack.append((g.arg, -sign))
        else:
            stack.extend((c, sign) for c in children(g))
    return out


def mutate_definition(result: FlatteningResult, index: int) -> Formula:
    """Weaken temporal definition ``index`` from an equivalence to one implication.

    The direction is the one that lets the witness hold spuriously where it
    is used positively (``beta -> b``) or fail spuriously where it is used
    negatively (``b -> beta``), so the weakened formula admits bad models.
    """
    name, beta = result.definitions[index]
    context = [result.main] + [d for j, (_, d) in enumerate(result.definitions) if j != index]
    signs = set()
    for g in context:
        signs |= polarities(g, name)
    if signs == {-1}:
        weak = Implies(Atom(name), beta)
    else:
        weak = Implies(beta, Atom(name))
    parts = [result.main]
    for j, (b, d) in enumerate(result.definitions):
        parts.append(BoxNS(weak if j == index else Iff(Atom(b), d)))
    parts.append(BoxNS(act(result.sigma)))
    return conj_chain(parts)


def guard_sites(sigma, f: Formula) -> list:
    """Act guards a relativization places, as (index, kind, polarity, operand)."""
    sites = []
    counter = [0]

    def visit(g, sign):
        if isinstance(g, Not):
            visit(g.arg, -sign)
            return
        if isinstance(g, (Implies,)):
            visit(g.left, -sign)
            visit(g.right, sign)
            return
        if isinstance(g, Iff):
            for c in children(g):
                visit(c, 0)
            return
        if isinstance(g, (Until, Since)):
            sites.append((counter[0], "imp", sign, g.left))
            counter[0] += 1
            sites.append((counter[0], "and", sign, g.right))
            counter[0] += 1
        elif isinstance(g, (Eventually, EventuallyPast)):
            sites.append((counter[0], "and", sign, g.arg))
            counter[0] += 1
        elif isinstance(g, (Box, BoxPast)):
            sites.append((counter[0], "imp", sign, g.arg))
            counter[0] += 1
        for c in children(g):
            visit(c, sign)

    visit(f, 1)
    return sites


def relativize_dropping(sigma, f: Formula, drop: int) -> Formula:
    """Relativization with the act guard number ``drop`` (pre-order) left out."""
    guard = act(sigma)
    counter = [0]

    def take():
        idx = counter[0]
        counter[0] += 1
        return idx != drop

    def go(g):
        if isinstance(g, (Until, Since)):
            keep_left, keep_right = take(), take()
            left, right = go(g.left), go(g.right)
            return type(g)(Implies(guard, left) if keep_left else left,
                           And(guard, right) if keep_right else right, g.interval)
        if isinstance(g, (Eventually, EventuallyPast)):
            keep = take()
            inner = go(g.arg)
            return type(g)(And(guard, inner) if keep else inner, g.interval)
        if isinstance(g, (Box, BoxPast)):
            keep = take()
            inner = go(g.arg)
            return type(g)(Implies(guard, inner) if keep else inner, g.interval)
        kids = children(g)
        new = tuple(go(c) for c in kids)
        return with_children(g, new) if new != kids else g

    return go(f)


def implies_act(g: Formula, sigma) -> bool:
    """Syntactic sufficient check that ``g`` can only hold where some sigma holds."""
    if isinstance(g, Atom):
        return g.name in sigma
    if isinstance(g, Not) and isinstance(g.arg, Not):
        return implies_act(g.arg.arg, sigma)
    if isinstance(g, And):
        return implies_act(g.left, sigma) or implies_act(g.right, sigma)
    if isinstance(g, Or):
        return implies_act(g.left, sigma) and implies_act(g.right, sigma)
    return False


def weakening_sites(sigma, f: Formula) -> list:
    """Guard sites whose removal weakens the whole formula.

    Dropping ``act &`` weakens under positive polarity, dropping ``act ->``
    under negative polarity.  Sites whose operand already implies act are
    skipped, since removing that guard changes nothing.
    """
    sigma = frozenset(sigma)
    out = []
    for idx, kind, sign, operand in guard_sites(sigma, f):
        if kind == "and" and sign == 1:
            if implies_act(operand, sigma):
                continue
            out.append(idx)
        elif kind == "imp" and sign == -1:
            out.append(idx)
    return out
