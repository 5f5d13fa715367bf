"""Command-line entry point.

Exit codes: 0 success or true, 1 false or counterexample, 2 usage and input
errors (reported on one line starting with ``error:``).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import countermachine as cm
from .classify import classify
from .evaluator import Evaluator, accept_empty_word, reject_empty_window
from .formula import Fk, Rat, atoms, walk
from .fuzz import TARGETS, run_fuzz
from .reductions import (
    DEFAULT_GRID, eliminate_fk, eliminate_rat, fk_to_rat_report, rat_to_fk,
    verify_oversampled_equisat, verify_simple_equisat,
)
from .syntax import __doc__ as GRAMMAR
from .syntax import parse, to_text
from .timedword import format_word, parse_word
from .transform import desugar, flatten, relativize, to_nnf

FORMATS = """file formats:
  formulas (.tl)   one formula; lines starting with '#' are comments
  timed words (.tw) one point per line, 'tau : p q', tau an exact rational
  machines (.cm)   'counters: k', then '3: inc 2 goto 5', '4: dec 1 goto 2',
                   '5: ifz 1 goto 7 else 2', '9: halt'; optional incremental
                   errors as 'step 4: 0 1' (increments per counter)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _strip_comments(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.lstrip().startswith("#"))


def _formula(args, attr="formula", expr_attr="expr"):
    expr = getattr(args, expr_attr, None)
    path = getattr(args, attr, None)
    if expr is not None:
        return parse(expr)
    if path is None:
        raise UsageError("a formula is required (-f FILE or -e TEXT)")
    return parse(_strip_comments(_read(path)))


def _write(args, text: str):
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sigma(args, f):
    if args.sigma:
        return frozenset(p.strip() for p in args.sigma.split(",") if p.strip())
    return frozenset(atoms(f))


def _grid(text):
    if not text:
        return DEFAULT_GRID
    return tuple(Fraction(tok) for tok in text.split(","))


# -- subcommands ----------------------------------------------------------------------


def cmd_parse(args):
    f = _formula(args)
    print(to_text(f))
    return 0


def cmd_classify(args):
    report = classify(_formula(args))
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return 0


def cmd_eval(args):
    f = _formula(args)
    word = parse_word(_read(args.word))
    policy = reject_empty_window if args.empty_window == "reject" else accept_empty_word
    ev = Evaluator(word, policy)
    positions = list(word.dom) if args.all else [args.pos]
    for pos in positions:
        if pos not in word.dom:
            raise ValueError(f"position {pos} outside 1..{len(word)}")
    values = [ev.holds(f, pos) for pos in positions]
    if args.json:
        for pos, v in zip(positions, values):
            print(json.dumps({"pos": pos, "value": v}))
    elif args.all:
        for pos, v in zip(positions, values):
            print(f"{pos}: {str(v).lower()}")
    else:
        print(str(values[0]).lower())
    return 0 if all(values) else 1


def cmd_nnf(args):
    print(to_text(to_nnf(_formula(args))))
    return 0


def cmd_desugar(args):
    print(to_text(desugar(_formula(args))))
    return 0


def cmd_flatten(args):
    f = _formula(args)
    res = flatten(f, _sigma(args, f))
    lines = [f"main: {to_text(res.main)}"]
    lines += [f"{b} <-> {to_text(beta)}" for b, beta in res.definitions]
    lines.append(f"formula: {to_text(res.formula())}")
    _write(args, "\n".join(lines) + "\n")
    return 0


def cmd_relativize(args):
    f = _formula(args)
    _write(args, to_text(relativize(_sigma(args, f), f)) + "\n")
    return 0


def _stats_line(stats):
    return " ".join(f"{k}={v}" for k, v in sorted(stats.items()))


def cmd_fk2rat(args):
    f = _formula(args)
    if isinstance(f, Fk):
        report = fk_to_rat_report(f, allow_general=args.general, factored=not args.flat)
        out, stats = report.output, dict(report.size_stats)
        stats["windows"] = ",".join(report.witness_states)
    else:
        if not any(isinstance(g, Fk) for g in walk(f)):
            raise ValueError("formula contains no Fk node")
        out = eliminate_fk(f)
        stats = {}
    _write(args, to_text(out) + "\n")
    stats.setdefault("size", sum(1 for _ in walk(out)))
    sys.stderr.write(_stats_line(stats) + "\n") if args.output is None else print(_stats_line(stats))
    return 0


def cmd_rat2fk(args):
    f = _formula(args)
    if isinstance(f, Rat):
        out = rat_to_fk(f, allow_general=args.general)
    elif any(isinstance(g, Rat) for g in walk(f)):
        out = eliminate_rat(f)
    else:
        raise ValueError("formula contains no Rat node")
    _write(args, to_text(out) + "\n")
    msg = f"size={sum(1 for _ in walk(out))}"
    sys.stderr.write(msg + "\n") if args.output is None else print(msg)
    return 0


def cmd_equisat(args):
    phi = _formula(args)
    sigma = _sigma(args, phi)
    grid = _grid(args.grid)
    if args.via == "flatten":
        res = flatten(phi, sigma)
        psi, hidden, mode = res.formula(), res.witnesses, "simple"
    elif args.via == "relativize":
        psi, hidden, mode = relativize(sigma, phi), frozenset({args.oversample}), "oversampled"
    else:
        if args.psi is None:
            raise UsageError("--psi is required unless --via is given")
        psi = parse(_strip_comments(_read(args.psi)))
        hidden = frozenset(p for p in (args.hidden or "").split(",") if p)
        mode = args.mode
    check = verify_simple_equisat if mode == "simple" else verify_oversampled_equisat
    report = check(phi, psi, sigma, hidden, args.max_len, grid)
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return 0 if report.ok else 1


def _machine(args):
    return cm.parse_machine(_read(args.machine))


def cmd_cm_run(args):
    m, schedule = _machine(args)
    r = cm.run(m, args.max_steps, schedule)
    if args.json:
        for i, c in enumerate(r.configs):
            print(json.dumps({"step": i, "pc": c.pc, "counters": list(c.counters)}))
        print(json.dumps({"halted": r.halted}))
    else:
        sys.stdout.write(cm.format_run(r))
    return 0 if r.halted else 1


def cmd_cm_encode(args):
    m, schedule = _machine(args)
    r = cm.run(m, args.max_steps, schedule)
    if not r.halted:
        raise ValueError(f"run did not halt within {args.max_steps} steps")
    _write(args, format_word(cm.encode_run(r)))
    return 0


def cmd_cm_formula(args):
    m, _ = _machine(args)
    named = cm.cm_conjuncts(m) if args.exact else cm.iecm_conjuncts(m)
    if args.conjunct:
        lookup = dict(named)
        if args.conjunct not in lookup:
            raise ValueError(f"unknown conjunct {args.conjunct!r}; choose from {', '.join(lookup)}")
        text = to_text(lookup[args.conjunct]) + "\n"
    elif args.named:
        text = "".join(f"{name}: {to_text(g)}\n" for name, g in named)
    else:
        f = cm.build_phi_cm(m) if args.exact else cm.build_phi_iecm(m)
        text = to_text(f) + "\n"
    _write(args, text)
    return 0


def cmd_fuzz(args):
    report = run_fuzz(args.target, args.seed, args.cases, args.words, args.max_len)
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return 0 if report.ok else 1


# -- argument parsing ----------------------------------------------------------------------


def _add_formula(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("-f", "--formula", metavar="FILE", help="formula file ('-' for stdin)")
    g.add_argument("-e", "--expr", metavar="TEXT", help="formula text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="timedlogic",
        description="Timed temporal logics over finite timed words.",
        epilog=GRAMMAR + "\n" + FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--json", action="store_true", help="line-delimited JSON output")
        return p

    p = add("parse", cmd_parse, "parse a formula and print it back")
    _add_formula(p)
    p = add("classify", cmd_classify, "report syntactic fragment membership")
    _add_formula(p)
    p = add("eval", cmd_eval, "evaluate a formula on a timed word")
    _add_formula(p)
    p.add_argument("-w", "--word", required=True, metavar="FILE")
    p.add_argument("--pos", type=int, default=1)
    p.add_argument("--all", action="store_true", help="evaluate at every position")
    p.add_argument("--empty-window", choices=("accept", "reject"), default="accept",
                   help="Rat on a window without points: test the empty word (accept) or fail (reject)")
    p = add("nnf", cmd_nnf, "negation normal form (TPTL)")
    _add_formula(p)
    p = add("desugar", cmd_desugar, "expand derived operators")
    _add_formula(p)
    for name, fn, text in (("flatten", cmd_flatten, "replace nested modalities by witnesses"),
                           ("relativize", cmd_relativize, "restrict modalities to action points")):
        p = add(name, fn, text)
        _add_formula(p)
        p.add_argument("--sigma", help="comma-separated action propositions (default: atoms)")
        p.add_argument("-o", "--output", metavar="FILE")
    p = add("fk2rat", cmd_fk2rat, "translate Fk into Rat")
    _add_formula(p)
    p.add_argument("-o", "--output", metavar="FILE")
    p.add_argument("--general", action="store_true", help="accept open or unsorted intervals")
    p.add_argument("--flat", action="store_true", help="list every state sequence separately")
    p = add("rat2fk", cmd_rat2fk, "translate Rat into Fk")
    _add_formula(p)
    p.add_argument("-o", "--output", metavar="FILE")
    p.add_argument("--general", action="store_true", help="accept non-closed intervals")
    p = add("equisat-check", cmd_equisat, "check equisatisfiability modulo projection")
    _add_formula(p)
    p.add_argument("--via", choices=("flatten", "relativize"), help="build psi from phi")
    p.add_argument("--psi", metavar="FILE")
    p.add_argument("--hidden", help="comma-separated extra propositions X")
    p.add_argument("--mode", choices=("simple", "oversampled"), default="simple")
    p.add_argument("--sigma")
    p.add_argument("--oversample", default="o", help="oversampling proposition for --via relativize")
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--grid", help="comma-separated timestamps (default 0,1/2,1,3/2,2)")
    for name, fn, text in (("cm-run", cmd_cm_run, "simulate a counter machine"),
                           ("cm-encode", cmd_cm_encode, "encode a halting run as a timed word"),
                           ("cm-formula", cmd_cm_formula, "emit the machine formula")):
        p = add(name, fn, text)
        p.add_argument("-m", "--machine", required=True, metavar="FILE")
        if name != "cm-formula":
            p.add_argument("--max-steps", type=int, default=1000)
        if name != "cm-run":
            p.add_argument("-o", "--output", metavar="FILE")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--errors", action="store_true", help="incremental-error machine (default)")
    g.add_argument("--exact", action="store_true", help="error-free machine")
    p.add_argument("--conjunct", help="print a single named conjunct")
    p.add_argument("--named", action="store_true", help="one named conjunct per line")
    p = add("fuzz", cmd_fuzz, "differential fuzzing of translations")
    p.add_argument("--target", required=True, choices=sorted(TARGETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--words", type=int, default=12, help="random words per case")
    p.add_argument("--max-len", type=int, default=6)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is not None and not -(2 ** 63) <= args.seed < 2 ** 64:
            raise UsageError("seed must fit in 64 bits")
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RecursionError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
