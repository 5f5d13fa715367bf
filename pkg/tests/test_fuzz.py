import json

from timedlogic.evaluator import Evaluator
from timedlogic.formula import Not
from timedlogic.fuzz import SplitMix64, case_rng, random_fk, random_until, run_fuzz
from timedlogic.timedword import parse_word


def test_splitmix_reference_outputs():
    # published first outputs for seed 0
    g = SplitMix64(0)
    assert [g.next(), g.next()] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]


def test_cases_replay_independently():
    a = [random_fk(case_rng(3, i), ("a", "b")) for i in range(5)]
    assert random_fk(case_rng(3, 4), ("a", "b")) == a[4]
    assert random_fk(case_rng(4, 4), ("a", "b")) != a[4]


def test_reports_are_deterministic():
    one, two = run_fuzz("until", 5, 20), run_fuzz("until", 5, 20)
    assert one.ok and one.to_json() == two.to_json()
    assert json.loads(one.to_json())["cases"] == 20


def test_broken_translation_is_caught():
    def broken(rng):
        f = random_until(rng, ("a", "b"))
        return f, Not(f)

    report = run_fuzz("negated", 1, 10, make=broken)
    assert not report.ok and report.case == 0
    word = parse_word(report.to_text().split("word:\n", 1)[1])
    ev = Evaluator(word)
    assert ev.holds(report.original, report.pos) == report.expected
    assert ev.holds(report.translated, report.pos) != report.expected
