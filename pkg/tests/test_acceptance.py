"""Acceptance suite: one PASS/FAIL line per criterion.

``pytest tests/test_acceptance.py`` prints the lines straight to the terminal;
``python tests/test_acceptance.py`` runs the criteria without pytest.
"""

import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from naive import Naive  # noqa: E402
from oracle_formulas import ORACLE_FORMULAS  # noqa: E402
from timedlogic import countermachine as cm  # noqa: E402
from timedlogic.classify import classify  # noqa: E402
from timedlogic.evaluator import Evaluator, seg_plus, tseg  # noqa: E402
from timedlogic.formula import And  # noqa: E402
from timedlogic.fuzz import case_rng, random_mtl, run_fuzz  # noqa: E402
from timedlogic.reductions import (  # noqa: E402
    mutate_definition, relativize_dropping, verify_oversampled_equisat, verify_simple_equisat,
    weakening_sites,
)
from timedlogic.syntax import parse  # noqa: E402
from timedlogic.timedword import (  # noqa: E402
    TimedWord, TimedWordError, enumerate_words, parse_interval, parse_word, project_oversampled,
    project_simple, set_nonadjacency,
)
from timedlogic.transform import flatten, relativize  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"

# pinned tolerances
ORACLE_SECONDS = 60
FK2RAT_SECONDS = 300
MACHINE_SECONDS = 120
FUZZ_CASES = 300
UNTIL_CASES = 200
FUZZ_SEED = 7
EQUISAT_SEED = 11
EQUISAT_FORMULAS = 20
MUTANTS_PER_KIND = 5

CRITERIA = {}


def criterion(n, title):
    def register(fn):
        CRITERIA[n] = (title, fn)
        return fn
    return register


# -- 1 ------------------------------------------------------------------------------------


@criterion(1, "evaluator agrees with the definitional oracle")
def oracle_equivalence():
    formulas = [parse(text) for text in ORACLE_FORMULAS]
    words = list(enumerate_words(["a", "b"], 5))
    # the budget is for the evaluator; the oracle runs separately
    start = time.perf_counter()
    got = []
    for w in words:
        ev = Evaluator(w)
        got.append([ev.holds(f, p) for f in formulas for p in w.dom])
    secs = time.perf_counter() - start
    checks = mismatches = 0
    for w, values in zip(words, got):
        nv = Naive([(e.props, e.tau) for e in w])
        want = [nv.holds(f, p) for f in formulas for p in w.dom]
        checks += len(want)
        mismatches += sum(a != b for a, b in zip(values, want))
    total = time.perf_counter() - start
    ok = mismatches == 0 and secs < ORACLE_SECONDS
    return ok, (f"{checks} checks, {mismatches} mismatches, evaluator {secs:.1f}s "
                f"(limit {ORACLE_SECONDS}s), with oracle {total:.1f}s")


# -- 2 ------------------------------------------------------------------------------------


def _letters(word):
    return " ".join("{" + ",".join(sorted(s)) + "}" for s in word)


def _pairs(w):
    return " ".join(f"({' '.join(sorted(e.props))},{e.tau})" for e in w)


def _project(fn, events, hidden):
    try:
        return _pairs(fn(TimedWord(events), hidden))
    except TimedWordError:
        return "not a behaviour"


def worked_report():
    rho = parse_word((FIXTURES / "seg_example.tw").read_text())
    family = (("f1", parse("F[(0,1)] b")), ("f2", parse("F[(1,2)] b")))
    lines = [
        f"seg+ 1..3 = {_letters(seg_plus(rho, 1, 3, family))}",
        f"tseg 1 (0,1) = {_letters(tseg(rho, 1, parse_interval('(0,1)'), family))}",
    ]
    for group in ("(1,2),(3,4)", "(1,2),(2,3)", "[2,2]"):
        ivs = [parse_interval(t) for t in group.replace("),", ")|").replace("],", "]|").split("|")]
        lines.append(f"nonadjacent {{{group}}} = {str(set_nonadjacency('plain', ivs)).lower()}")
    rows = {}
    for line in (FIXTURES / "adjacency.tl").read_text().splitlines():
        if not line.startswith("#"):
            name, text, _ = (part.strip() for part in line.split("|"))
            rows[name] = classify(parse(text))
    cited = [("sep_34", "na"), ("touch_23", "na"), ("punctual", "na"), ("two_scopes", "na"),
             ("one_scope", "na_minus"), ("one_scope", "na_plus"), ("minus_only", "na_minus"),
             ("plus_only", "na_plus"), ("neither", "na_plus"), ("neither", "na_minus")]
    for name, field in cited:
        attr = "is_na_1tptl" if field == "na" else f"is_{field}"
        lines.append(f"{name} {field} = {str(getattr(rows[name], attr)).lower()}")
    hidden = {"c", "d"}
    lines.append("simple rho' = " + _project(
        project_simple, [({"a", "d"}, 0), ({"b", "c"}, "0.3"), ({"a", "b", "d"}, "1.1")], hidden))
    lines.append("simple rho'' = " + _project(
        project_simple, [({"a"}, 0), ({"c", "d"}, "0.3"), ({"b", "d"}, "1.1")], hidden))
    over = parse_word((FIXTURES / "oversampled_example.tw").read_text())
    lines.append("oversampled rho' = " + _project(project_oversampled, list(over), hidden))
    delta = parse_word((FIXTURES / "not_oversampled.tw").read_text())
    lines.append("oversampled delta = " + _project(project_oversampled, list(delta), hidden))
    return "\n".join(lines) + "\n"


@criterion(2, "worked examples reproduce byte for byte")
def worked_examples():
    got = worked_report()
    want = (FIXTURES / "worked_examples.expected").read_text()
    diff = [a for a, b in zip(got.splitlines(), want.splitlines()) if a != b]
    ok = got == want
    detail = f"{len(want.splitlines())} lines identical" if ok else f"first differing line: {diff[:1]}"
    return ok, detail


# -- 3 to 5 -------------------------------------------------------------------------------


def _fuzz(target, cases):
    start = time.perf_counter()
    report = run_fuzz(target, FUZZ_SEED, cases)
    return report, time.perf_counter() - start


@criterion(3, "Fk to Rat differential fuzz")
def fuzz_fk2rat():
    report, secs = _fuzz("fk2rat", FUZZ_CASES)
    ok = report.ok and report.cases >= FUZZ_CASES and secs < FK2RAT_SECONDS
    return ok, (f"{report.cases} cases, {report.words} words, "
                f"{'no' if report.ok else 'a'} counterexample, {secs:.1f}s (limit {FK2RAT_SECONDS}s)")


@criterion(4, "Rat to Fk differential fuzz and round trip")
def fuzz_rat2fk():
    forward, _ = _fuzz("rat2fk", FUZZ_CASES)
    back, secs = _fuzz("roundtrip", FUZZ_CASES)
    ok = forward.ok and back.ok
    return ok, (f"rat2fk {forward.cases} cases {'ok' if forward.ok else 'FAILED'}, "
                f"round trip {back.cases} cases {'ok' if back.ok else 'FAILED'}")


@criterion(5, "until through FRat")
def fuzz_until():
    report, _ = _fuzz("until", UNTIL_CASES)
    return report.ok, f"{report.cases} cases, {'no' if report.ok else 'a'} counterexample"


# -- 6 ------------------------------------------------------------------------------------


@criterion(6, "flattening and relativization equisatisfiability")
def equisat():
    sigma = {"a", "b"}
    failures, flat_mutants, rel_mutants = [], [], []
    for i in range(EQUISAT_FORMULAS):
        phi = random_mtl(case_rng(EQUISAT_SEED, i), sigma)
        fr = flatten(phi, sigma)
        if not verify_simple_equisat(phi, fr.formula(), sigma, fr.witnesses).ok:
            failures.append(f"simple #{i}")
        if not verify_oversampled_equisat(phi, relativize(sigma, phi), sigma, {"o"}).ok:
            failures.append(f"oversampled #{i}")
        if fr.definitions and len(flat_mutants) < MUTANTS_PER_KIND:
            mutant = mutate_definition(fr, len(fr.definitions) - 1)
            flat_mutants.append(not verify_simple_equisat(phi, mutant, sigma, fr.witnesses).ok)
        sites = weakening_sites(sigma, phi)
        if sites and len(rel_mutants) < MUTANTS_PER_KIND:
            mutant = relativize_dropping(sigma, phi, sites[0])
            rel_mutants.append(not verify_oversampled_equisat(phi, mutant, sigma, {"o"}).ok)
    caught = sum(flat_mutants) + sum(rel_mutants)
    total = len(flat_mutants) + len(rel_mutants)
    ok = not failures and total == 2 * MUTANTS_PER_KIND and caught == total
    return ok, (f"{EQUISAT_FORMULAS} formulas, {len(failures)} harness failures {failures or ''}, "
                f"{caught}/{total} mutants caught").replace(" ,", ",")


# -- 7 and 8 ------------------------------------------------------------------------------


def _machine(name):
    return cm.parse_machine((FIXTURES / name).read_text())


def _mutations(word):
    """Catalogued corruptions of the double machine's encoding, with pinned conjuncts."""
    base = [(sorted(e.props), e.tau) for e in word]

    def nth(prop, n):
        return [i for i, (ps, _) in enumerate(base) if prop in ps][n]

    out = {}
    evs = list(base)
    del evs[nth("b.1", 2)]
    out["delete copied point"] = (evs, ["phi1", "phi8_p2", "phi9"])
    evs, i = list(base), nth("b.1", 2)
    t0, t1 = evs[i][1], evs[i + 1][1]
    evs[i + 1:i + 1] = [(["a.1"], t0 + (t1 - t0) / 3), (["b.1"], t0 + 2 * (t1 - t0) / 3)]
    out["spurious pair"] = (evs, ["phi8_p2", "phi8_p3", "phi9"])
    evs = list(base)
    starts = [i for i, (ps, _) in enumerate(evs) if ps[0].startswith("s.")]
    a, b = starts[2], starts[3]
    evs[a], evs[b] = (evs[b][0], evs[a][1]), (evs[a][0], evs[b][1])
    out["swapped markers"] = (evs, ["phi1", "phi8_p2", "phi8_p3", "phi8_p4"])
    evs, i = list(base), nth("b.1", 0)
    evs[i] = (["a.1"], evs[i][1])
    out["relabelled point"] = (evs, ["phi1", "phi7", "phi9"])
    return {k: (TimedWord(v), pins) for k, (v, pins) in out.items()}


@criterion(7, "counter machines end to end")
def machines():
    start = time.perf_counter()
    problems = []
    for name in ("double", "branch"):
        m, _ = _machine(f"{name}.cm")
        w = cm.encode_run(cm.run(m), check=False)
        ev = Evaluator(w)
        if not (ev.holds(cm.build_phi_iecm(m), 1) and ev.holds(cm.build_phi_cm(m), 1)):
            problems.append(f"{name} golden")
    m, sched = _machine("iecm_error.cm")
    w = cm.encode_run(cm.run(m, error_schedule=sched), check=False)
    if cm.failing_conjuncts(w, m, exact=True) != ["phi9"]:
        problems.append("error run")
    double, _ = _machine("double.cm")
    mutations = _mutations(cm.encode_run(cm.run(double)))
    for label, (word, pins) in mutations.items():
        if cm.failing_conjuncts(word, double, exact=True) != pins:
            problems.append(label)
    secs = time.perf_counter() - start
    ok = not problems and secs < MACHINE_SECONDS
    return ok, (f"2 goldens, 1 error run, {len(mutations)} mutation classes, "
                f"{len(problems)} problems {problems or ''}, {secs:.1f}s (limit {MACHINE_SECONDS}s)"
                ).replace(" ,", ",")


@criterion(8, "machine formulas are open TPTL and differ by one conjunct")
def structure():
    problems = []
    for name in ("double", "branch"):
        m, _ = _machine(f"{name}.cm")
        iecm, full = cm.build_phi_iecm(m), cm.build_phi_cm(m)
        if not classify(iecm).is_open_tptl:
            problems.append(f"{name} not open")
        diff = [] if iecm == full else ast_diff(iecm, full)
        if diff != [("right", cm.build_phi9(m))]:
            problems.append(f"{name} diff {len(diff)}")
    return not problems, f"2 machines, {len(problems)} problems {problems or ''}".rstrip()


def ast_diff(a, b):
    """Subtrees of ``b`` not in ``a`` when ``b`` extends ``a`` by one conjunct."""
    if isinstance(b, And) and b.left == a:
        return [("right", b.right)]
    return [("root", b)]


# -- drivers ------------------------------------------------------------------------------


def run_criterion(n):
    title, fn = CRITERIA[n]
    ok, detail = fn()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {n} ({title}): {detail}"


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line = run_criterion(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
