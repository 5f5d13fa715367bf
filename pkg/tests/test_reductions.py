from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from naive import Naive
from timedlogic import automata as am
from timedlogic.evaluator import satisfies
from timedlogic.formula import And, Fk, FRat, Not, Or, Rat, walk
from timedlogic.fuzz import case_rng, random_fk, random_rat, random_until, random_word
from timedlogic.reductions import (
    ReductionError, eliminate_fk, eliminate_rat, fk_to_rat, fk_to_rat_report, fk_windows,
    mutate_definition, rat_to_fk, relativize_dropping, until_via_frat, verify_oversampled_equisat,
    verify_simple_equisat, weakening_sites,
)
from timedlogic.syntax import parse
from timedlogic.timedword import Interval, parse_word, project_oversampled, project_simple
from timedlogic.transform import flatten, relativize

FIXTURES = Path(__file__).parent / "fixtures"
PROPS = ("a", "b")


def agree_with_oracle(f, g, w):
    nv = Naive([(e.props, e.tau) for e in w])
    return all(nv.holds(f, p) == nv.holds(g, p) for p in w.dom)


def disjuncts(f):
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    return [f]


class TestUntil:
    def test_direct_witness(self):
        w = parse_word("0 : a\n3/10 : a\n7/10 : b\n")
        f = parse("a U[(0,1)] b")
        g = until_via_frat(f)
        assert isinstance(g, FRat)
        assert satisfies(w, f) and satisfies(w, g)

    def test_no_witness(self):
        w = parse_word("0 : a\n3/10 : a\n7/5 : b\n")
        f = parse("a U[(0,1)] b")
        assert not satisfies(w, f) and not satisfies(w, until_via_frat(f))

    @settings(max_examples=60)
    @given(st.integers(0, 2**32))
    def test_against_oracle(self, seed):
        rng = case_rng(seed, 1)
        f = random_until(rng, PROPS)
        w = random_word(rng, PROPS, 6)
        assert agree_with_oracle(f, until_via_frat(f), w)


class TestFkToRat:
    def test_two_interval_windows(self):
        f = parse("Fk[[1,2];[3,4]](/{f1}*/ | /{f2}*/ | /({f1}+{f2})*/; f1 := a, f2 := b)")
        assert fk_windows(f) == [
            Interval(0, 1, True, False), Interval(1, 2), Interval(2, 3, False, False),
            Interval(3, 4), Interval(4, float("inf"), False, False),
        ]
        report = fk_to_rat_report(f)
        assert report.witness_states == ("[0,1)", "[1,2]", "(2,3)", "[3,4]", "(4,inf)")
        assert not any(isinstance(g, Fk) for g in walk(report.output))

    def test_single_interval_bound(self):
        f = parse("Fk[[1,2]](/{f1}/ | /{f1}/; f1 := a)")
        q1, q2 = (len(a.states) for a in f.automata)
        assert fk_to_rat_report(f).size_stats["bound"] == q1 * q2

    def test_disjuncts_within_bound(self):
        for i in range(30):
            report = fk_to_rat_report(random_fk(case_rng(5, i), PROPS))
            assert report.size_stats["disjuncts"] <= report.size_stats["bound"]

    @pytest.mark.parametrize("text,message", [
        ("Fk[(1,2)](/{f1}/ | /{f1}/; f1 := a)", "not a closed bounded interval"),
        ("Fk[[1,inf)](/{f1}/ | /{f1}/; f1 := a)", "not a closed bounded interval"),
        ("Fk[[3,4];[1,2]](/{f1}/ | /{f1}/ | /{f1}/; f1 := a)", "not sorted"),
    ])
    def test_preconditions(self, text, message):
        with pytest.raises(ReductionError, match=message):
            fk_to_rat(parse(text))

    def test_general_intervals_behind_flag(self):
        f = parse("Fk[(1,2)](/{f1}/ | /{f1}*/; f1 := a)")
        g = fk_to_rat(f, allow_general=True)
        for i in range(20):
            assert agree_with_oracle(f, g, random_word(case_rng(9, i), PROPS, 6))

    @settings(max_examples=40)
    @given(st.integers(0, 2**32))
    def test_against_oracle(self, seed):
        rng = case_rng(seed, 2)
        f = random_fk(rng, PROPS)
        g = fk_to_rat(f)
        for _ in range(3):
            assert agree_with_oracle(f, g, random_word(rng, PROPS, 6))

    def test_flat_and_factored_agree(self):
        for i in range(15):
            rng = case_rng(12, i)
            f = random_fk(rng, PROPS)
            flat, shared = fk_to_rat(f, factored=False), fk_to_rat(f)
            for _ in range(4):
                assert agree_with_oracle(flat, shared, random_word(rng, PROPS, 5))


class TestRatToFk:
    def test_no_rat_and_arity(self):
        g = rat_to_fk(parse("Rat[[1,2]](/{f1}.{f2}*/; f1 := a, f2 := b)"))
        assert not any(isinstance(h, Rat) for h in walk(g))
        assert max(len(h.intervals) for h in walk(g) if isinstance(h, Fk)) <= 4

    def test_second_case_fires_without_early_points(self):
        f = parse("Rat[[1,2]](/{f1}*/; f1 := a)")
        g = rat_to_fk(f)
        w = parse_word("0 : b\n3/2 : a\n3 : b\n")
        assert satisfies(w, f) and satisfies(w, g)
        fired = [d for d in disjuncts(g) if satisfies(w, d)]
        assert len(fired) == 1
        guard = fired[0]
        assert isinstance(guard, And) and isinstance(guard.left, Not)

    def test_universal_automaton(self):
        f = Rat(Interval(1, 2), am.universal(["f1"]), (("f1", parse("a")),))
        g = rat_to_fk(f)
        for i in range(20):
            w = random_word(case_rng(4, i), PROPS, 5)
            assert all(Naive([(e.props, e.tau) for e in w]).holds(g, p) for p in w.dom)

    def test_rejects_open_interval(self):
        with pytest.raises(ReductionError, match="closed"):
            rat_to_fk(parse("Rat[(1,2)](/{f1}*/; f1 := a)"))

    @settings(max_examples=40)
    @given(st.integers(0, 2**32))
    def test_against_oracle(self, seed):
        rng = case_rng(seed, 3)
        f = random_rat(rng, PROPS)
        g = rat_to_fk(f)
        for _ in range(3):
            assert agree_with_oracle(f, g, random_word(rng, PROPS, 6))

    @settings(max_examples=25)
    @given(st.integers(0, 2**32))
    def test_round_trip(self, seed):
        rng = case_rng(seed, 4)
        f = random_fk(rng, PROPS, k=1)
        g = eliminate_rat(fk_to_rat(f))
        assert not any(isinstance(h, Rat) for h in walk(g))
        for _ in range(3):
            assert agree_with_oracle(f, g, random_word(rng, PROPS, 5))

    def test_eliminate_fk_nested(self):
        f = parse("a & Fk[[0,1]](/{f1}*/ | /({}+{f1})*/; f1 := F b)")
        g = eliminate_fk(f)
        assert not any(isinstance(h, Fk) for h in walk(g))
        for i in range(10):
            assert agree_with_oracle(f, g, random_word(case_rng(6, i), PROPS, 5))


class TestHarnesses:
    def test_identity(self):
        f = parse("a U[[0,1]] b")
        assert verify_simple_equisat(f, f, PROPS, set()).ok
        simple = verify_simple_equisat(f, f, PROPS, set(), max_len=2)
        over = verify_oversampled_equisat(f, f, PROPS, set(), max_len=2)
        assert (simple.ok, simple.words_checked, simple.psi_models) == (
            over.ok, over.words_checked, over.psi_models)

    def test_flattening_fixture(self):
        f = parse((FIXTURES / "flatten_example.tl").read_text())
        r = flatten(f, {"a", "c", "d"})
        # the formula needs three points; a coarse grid keeps the universe small
        report = verify_simple_equisat(f, r.formula(), {"a", "c", "d"}, r.witnesses, max_len=3,
                                       grid=(0, 1))
        assert report.ok and report.phi_models > 0

    @pytest.mark.parametrize("index", [0, 1])
    def test_weakened_definition_is_caught(self, index):
        f = parse((FIXTURES / "flatten_example.tl").read_text())
        r = flatten(f, {"a", "c", "d"})
        mutant = mutate_definition(r, index)
        report = verify_simple_equisat(f, mutant, {"a", "c", "d"}, r.witnesses, max_len=2)
        assert not report.ok
        # the counterexample replays
        assert satisfies(report.counterexample, mutant)
        assert not satisfies(project_simple(report.counterexample, r.witnesses), f)
        assert "COUNTEREXAMPLE" in report.to_text()

    @pytest.mark.parametrize("text", ["a U[[0,2]] (F b)", "!(G[[0,1]] a)"])
    def test_relativization(self, text):
        f = parse(text)
        assert verify_oversampled_equisat(f, relativize(PROPS, f), PROPS, {"c"}).ok
        (site,) = weakening_sites(PROPS, f)
        mutant = relativize_dropping(PROPS, f, site)
        report = verify_oversampled_equisat(f, mutant, PROPS, {"c"})
        assert not report.ok
        assert satisfies(report.counterexample, mutant)
        assert not satisfies(project_oversampled(report.counterexample, {"c"}), f)

    def test_guard_implied_by_operand_is_skipped(self):
        assert weakening_sites(PROPS, parse("F (a & !b)")) == []

    def test_overlap_rejected(self):
        f = parse("a")
        with pytest.raises(ReductionError):
            verify_simple_equisat(f, f, {"a"}, {"a"})
