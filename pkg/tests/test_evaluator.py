from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from naive import Naive
from strategies import mtl_formulas, nat_intervals, timed_words, tptl_formulas
from timedlogic.evaluator import (
    EvaluationError, Evaluator, evaluate, reject_empty_window, satisfies, seg_minus, seg_plus,
    tseg,
)
from timedlogic.formula import Box, BoxPast, Eventually, EventuallyPast, Freeze, Not, Pk
from timedlogic.fuzz import case_rng, random_fk, random_word
from timedlogic.syntax import parse
from timedlogic.timedword import Interval, parse_word
from timedlogic.transform import embed_mtl

FIXTURES = Path(__file__).parent / "fixtures"
RHO = parse_word((FIXTURES / "seg_example.tw").read_text())
S_SET = (("f1", parse("F[(0,1)] b")), ("f2", parse("F[(1,2)] b")))
BOTH, FIRST = frozenset({"f1", "f2"}), frozenset({"f1"})


def oracle(w):
    return Naive([(e.props, e.tau) for e in w])


class TestExamples:
    def test_third_point(self):
        assert evaluate(RHO, 3, parse("F[(0,1)] b"))
        assert not evaluate(RHO, 3, parse("F[(1,2)] b"))

    def test_single_point(self):
        w = parse_word((FIXTURES / "single_point.tw").read_text())
        assert satisfies(w, parse("a"))
        assert not satisfies(w, parse("F true"))

    def test_psi_witnesses(self):
        psi = parse((FIXTURES / "psi_na.tl").read_text().splitlines()[1])
        w = parse_word("0 : d\n1/10 : a\n13/10 : b\n19/10 : c\n")
        assert satisfies(w, psi) and oracle(w).holds(psi, 1)
        late = parse_word("0 : d\n1/10 : a\n13/10 : b\n21/10 : c\n")
        assert not satisfies(late, psi) and not oracle(late).holds(psi, 1)

    def test_errors(self):
        with pytest.raises(EvaluationError, match="unbound"):
            Evaluator(RHO).holds(parse("T-x in (0,1)", allow_free=True), 1)
        with pytest.raises(EvaluationError):
            Evaluator(RHO).holds(parse("a"), 5)


class TestSegments:
    def test_seg_plus(self):
        assert seg_plus(RHO, 1, 3, S_SET) == [BOTH, BOTH, FIRST]
        assert seg_plus(RHO, 3, 2, S_SET) == []

    def test_tseg(self):
        assert tseg(RHO, 1, Interval(0, 1, False, False), S_SET) == [BOTH, FIRST]
        assert tseg(RHO, 1, Interval(5, 6), S_SET) == []

    @given(timed_words(), st.data())
    def test_seg_minus_reverses(self, w, data):
        x = data.draw(st.integers(1, len(w)))
        y = data.draw(st.integers(x, len(w)))
        assert seg_minus(w, y, x, S_SET) == list(reversed(seg_plus(w, x, y, S_SET)))

    @given(timed_words(), nat_intervals, st.data())
    def test_tseg_filters(self, w, iv, data):
        i = data.draw(st.integers(1, len(w)))
        ev = Evaluator(w)
        expected = [
            frozenset(n for n, g in S_SET if ev.holds(g, z))
            for z in w.dom if z > i and _inside(iv, w.tau(z) - w.tau(i))
        ]
        assert tseg(w, i, iv, S_SET) == expected


def _inside(iv, d):
    lo_ok = d > iv.lo or (iv.lo_closed and d == iv.lo)
    hi_ok = d < iv.hi or (iv.hi_closed and d == iv.hi)
    return lo_ok and hi_ok


class TestAgainstOracle:
    @settings(max_examples=200)
    @given(mtl_formulas(), timed_words())
    def test_mtl(self, f, w):
        ev, nv = Evaluator(w), oracle(w)
        assert [ev.holds(f, p) for p in w.dom] == [nv.holds(f, p) for p in w.dom]

    @settings(max_examples=200)
    @given(tptl_formulas(), timed_words())
    def test_tptl(self, f, w):
        ev, nv = Evaluator(w), oracle(w)
        assert [ev.holds(f, p) for p in w.dom] == [nv.holds(f, p) for p in w.dom]

    @settings(max_examples=150)
    @given(st.integers(0, 2**32), st.integers(1, 2))
    def test_fk_and_pk(self, seed, k):
        rng = case_rng(seed, 0)
        f = random_fk(rng, ("a", "b"), k)
        g = Pk(f.intervals, f.automata, f.formulas)
        w = random_word(rng, ("a", "b"), 6)
        ev, nv = Evaluator(w), oracle(w)
        for p in w.dom:
            assert ev.holds(f, p) == nv.holds(f, p)
            assert ev.holds(g, p) == nv.holds(g, p)


class TestInvariants:
    @given(tptl_formulas(), timed_words())
    def test_freeze_idempotent(self, f, w):
        ev = Evaluator(w)
        body = f.body
        for p in w.dom:
            once = ev.holds(Freeze("x", body), p)
            assert ev.holds(Freeze("x", Freeze("x", body)), p) == once
            assert ev.holds(body, p, {"x": w.tau(p)}) == once

    @given(mtl_formulas(max_leaves=4), st.one_of(st.none(), nat_intervals), timed_words())
    def test_duality(self, f, iv, w):
        ev = Evaluator(w)
        for p in w.dom:
            assert ev.holds(Box(f, iv), p) == (not ev.holds(Eventually(Not(f), iv), p))
            assert ev.holds(BoxPast(f, iv), p) == (not ev.holds(EventuallyPast(Not(f), iv), p))

    @given(mtl_formulas(), timed_words())
    def test_mtl_embedding(self, f, w):
        g = embed_mtl(f)
        ev = Evaluator(w)
        assert all(ev.holds(f, p) == ev.holds(g, p) for p in w.dom)

    def test_empty_window_policy(self):
        w = parse_word("0 : a\n3 : b\n")
        star = parse("Rat[[1,2]](/{f1}*/; f1 := a)")
        plus = parse("Rat[[1,2]](/{f1}.{f1}*/; f1 := a)")
        assert Evaluator(w).holds(star, 1)
        assert not Evaluator(w).holds(plus, 1)
        assert not Evaluator(w, reject_empty_window).holds(star, 1)

    def test_concurrent_calls_agree(self):
        f = parse("x.(F (b & T-x in (1,2) & F (b & T-x in (1,2))))")
        words = [random_word(case_rng(3, i), ("a", "b"), 6) for i in range(40)]
        expected = [satisfies(w, f) for w in words]
        shared = [Evaluator(w) for w in words]
        with ThreadPoolExecutor(4) as pool:
            got = list(pool.map(lambda ev: ev.holds(f, 1), shared * 4))
        assert got == expected * 4

    def test_valuation_is_exact(self):
        f = parse("T-x in [0,0]", allow_free=True)
        w = parse_word("0 : a\n1/3 : a\n")
        assert Evaluator(w).holds(f, 2, {"x": Fraction(1, 3)})
        assert not Evaluator(w).holds(f, 2, {"x": Fraction(333, 1000)})
