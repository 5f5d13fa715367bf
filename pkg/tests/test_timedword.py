from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from strategies import intervals, timed_words
from timedlogic.timedword import (
    INF, Interval, IntervalError, PointedWord, TimedWord, TimedWordError, enumerate_words,
    format_word, interval_contains, is_adjacent, is_negatively_nonadjacent, is_nonadjacent,
    is_oversampled_behaviour, is_positively_nonadjacent, is_simple_behaviour, parse_interval,
    parse_word, project_oversampled, project_simple, set_nonadjacency, to_rational,
)


def iv(text):
    return parse_interval(text)


def word(*events):
    return TimedWord([(set(p.split()), Fraction(t)) for p, t in events])


class TestInterval:
    def test_membership(self):
        assert interval_contains(iv("(1,2)"), Fraction(3, 2))
        assert interval_contains(iv("[2,2]"), 2)
        assert not interval_contains(iv("[2,2]"), Fraction("2.0001"))
        assert not interval_contains(iv("(0,inf)"), 0)
        assert interval_contains(iv("(0,inf)"), 10**9)

    @pytest.mark.parametrize("text", ["(2,2)", "[2,2)", "[3,1]", "[0,inf]", "[-inf,0]"])
    def test_rejects_malformed(self, text):
        with pytest.raises(IntervalError):
            iv(text)

    def test_parse_forms(self):
        assert iv("[-3,-1]") == Interval(-3, -1)
        assert iv("(0,inf)") == Interval(0, INF, False, False)
        assert iv("[0,3)") == Interval(0, 3, True, False)


class TestAdjacency:
    def test_pairs(self):
        assert not is_adjacent(iv("(1,2)"), iv("(3,4)"))
        assert is_adjacent(iv("(1,2)"), iv("(2,3)"))
        assert is_adjacent(iv("[2,2]"), iv("[2,2]"))
        assert not is_adjacent(iv("[0,1]"), iv("[-1,0]"))

    def test_signed_variants(self):
        assert is_negatively_nonadjacent(iv("[1,2]"), iv("[2,3]"))
        assert not is_positively_nonadjacent(iv("[1,2]"), iv("[2,3]"))
        assert is_positively_nonadjacent(iv("[-3,-1]"), iv("[-1,0]"))
        assert not is_negatively_nonadjacent(iv("[-3,-1]"), iv("[-1,0]"))

    def test_sets(self):
        assert set_nonadjacency("plain", [iv("(1,2)"), iv("(3,4)")])
        assert not set_nonadjacency("plain", [iv("(1,2)"), iv("(2,3)")])
        assert not set_nonadjacency("plain", [iv("[2,2]")])
        for kind in ("plain", "positive", "negative"):
            assert set_nonadjacency(kind, [])
        with pytest.raises(ValueError):
            set_nonadjacency("sideways", [])

    def test_infinite_bounds_never_touch(self):
        assert not is_adjacent(iv("(1,inf)"), iv("(1,inf)"))

    @given(intervals(), intervals())
    def test_symmetric(self, a, b):
        assert is_adjacent(a, b) == is_adjacent(b, a)

    @given(intervals(), intervals())
    def test_plain_is_both_signed(self, a, b):
        both = is_positively_nonadjacent(a, b) and is_negatively_nonadjacent(a, b)
        assert is_nonadjacent(a, b) == both


class TestTimedWord:
    def test_validation(self):
        with pytest.raises(TimedWordError):
            TimedWord([])
        with pytest.raises(TimedWordError):
            word(("a", "1/2"))
        with pytest.raises(TimedWordError):
            word(("a", 0), ("b", 2), ("a", 1))
        with pytest.raises(TimedWordError):
            TimedWord([(set(), 0)])

    @given(st.lists(st.tuples(st.frozensets(st.sampled_from("ab")),
                              st.fractions(min_value=-2, max_value=3)), max_size=5))
    def test_fuzzed_inputs_validate_or_reject(self, events):
        good = (
            bool(events)
            and events[0][1] == 0
            and all(p for p, _ in events)
            and all(events[k][1] <= events[k + 1][1] for k in range(len(events) - 1))
        )
        if good:
            assert len(TimedWord(events)) == len(events)
        else:
            with pytest.raises(TimedWordError):
                TimedWord(events)

    def test_text_round_trip(self):
        w = parse_word("# comment\n0 : a\n0.5 : b a\n3/2 : b\n")
        assert w.timestamps == (0, Fraction(1, 2), Fraction(3, 2))
        assert w.props(2) == {"a", "b"}
        assert format_word(w) == "0 : a\n1/2 : a b\n3/2 : b\n"
        assert parse_word(format_word(w)) == w

    @given(timed_words())
    def test_format_parse_identity(self, w):
        assert parse_word(format_word(w)) == w

    def test_parse_errors_name_the_line(self):
        with pytest.raises(TimedWordError, match="line 2"):
            parse_word("0 : a\nnonsense\n")

    def test_pointed(self):
        w = word(("a", 0))
        assert PointedWord(w, 1).pos == 1
        with pytest.raises(TimedWordError):
            PointedWord(w, 2)

    def test_rationals_are_exact(self):
        assert to_rational("0.1") + to_rational("0.2") == to_rational("3/10")

    def test_enumeration_counts(self):
        # 3 letters; non-decreasing grids of n-1 values from 5 points
        assert sum(1 for _ in enumerate_words(["a", "b"], 1)) == 3
        assert sum(1 for _ in enumerate_words(["a", "b"], 2)) == 3 + 5 * 9


class TestProjection:
    def test_simple(self):
        rho = word(("a d", 0), ("b c", "0.3"), ("a b d", "1.1"))
        assert project_simple(rho, {"c", "d"}) == word(("a", 0), ("b", "0.3"), ("a b", "1.1"))
        assert project_simple(rho, set()) == rho

    def test_simple_rejects(self):
        rho = word(("a", 0), ("c d", "0.3"), ("b d", "1.1"))
        assert not is_simple_behaviour(rho, {"c", "d"})
        with pytest.raises(TimedWordError):
            project_simple(rho, {"c", "d"})

    def test_oversampled(self):
        rho = word(("a", 0), ("c d", "0.3"), ("a b", "0.7"), ("b d", "1.1"))
        assert project_oversampled(rho, {"c", "d"}) == word(("a", 0), ("a b", "0.7"), ("b", "1.1"))

    def test_oversampled_rejects(self):
        delta = word(("c d", 0), ("a", "0.2"))
        assert not is_oversampled_behaviour(delta, {"c", "d"})
        with pytest.raises(TimedWordError):
            project_oversampled(delta, {"c", "d"})

    @given(timed_words(props=("a", "b", "c")))
    def test_projection_shapes(self, w):
        hidden = {"c"}
        if is_simple_behaviour(w, hidden):
            p = project_simple(w, hidden)
            assert p.timestamps == w.timestamps
            assert project_oversampled(w, hidden) == p
        if is_oversampled_behaviour(w, hidden):
            p = project_oversampled(w, hidden)
            assert len(p) <= len(w)
            it = iter(w.timestamps)
            assert all(any(t == u for u in it) for t in p.timestamps)
