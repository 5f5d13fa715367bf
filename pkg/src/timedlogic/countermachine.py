"""k-counter machines, their incremental-error variant, the timed-word
encoding of halting runs and the formulas that characterise such words."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .formula import (
    FALSE, TRUE, And, Atom, Box, BoxNS, Eventually, EventuallyNS, EventuallyPast, Formula,
    Freeze, Implies, Next, Not, Or, TMinusX, Until, XMinusT, conj_chain, disj_chain,
)
from .evaluator import Evaluator
from .timedword import INF, Interval, TimedWord


class MachineError(ValueError):
    pass


@dataclass(frozen=True)
class Inc:
    counter: int
    goto: int

    def __str__(self):
        return f"inc {self.counter} goto {self.goto}"


@dataclass(frozen=True)
class Dec:
    counter: int
    goto: int

    def __str__(self):
        return f"dec {self.counter} goto {self.goto}"


@dataclass(frozen=True)
class IfZero:
    counter: int
    goto_zero: int
    goto_nonzero: int

    def __str__(self):
        return f"ifz {self.counter} goto {self.goto_zero} else {self.goto_nonzero}"


@dataclass(frozen=True)
class Halt:
    def __str__(self):
        return "halt"


Instruction = Union[Inc, Dec, IfZero, Halt]


@dataclass(frozen=True)
class CounterMachine:
    k: int
    instructions: tuple

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        n = len(self.instructions)
        if self.k < 1:
            raise MachineError("a machine needs at least one counter")
        if n == 0 or not isinstance(self.instructions[-1], Halt):
            raise MachineError(f"the last instruction (p{n}) must be halt")
        halts = [i for i, ins in enumerate(self.instructions, start=1) if isinstance(ins, Halt)]
        if len(halts) != 1:
            raise MachineError(f"exactly one halt instruction expected, found at {halts}")
        for idx, ins in enumerate(self.instructions, start=1):
            if isinstance(ins, Halt):
                continue
            if not 1 <= ins.counter <= self.k:
                raise MachineError(f"p{idx}: counter {ins.counter} outside 1..{self.k}")
            targets = (ins.goto_zero, ins.goto_nonzero) if isinstance(ins, IfZero) else (ins.goto,)
            for t in targets:
                if not 1 <= t <= n:
                    raise MachineError(f"p{idx}: goto target {t} outside 1..{n}")

    @property
    def n(self) -> int:
        return len(self.instructions)

    def instruction(self, pc: int) -> Instruction:
        return self.instructions[pc - 1]


@dataclass(frozen=True)
class Configuration:
    pc: int
    counters: tuple

    def __post_init__(self):
        object.__setattr__(self, "counters", tuple(self.counters))
        if self.pc < 1:
            raise MachineError(f"program counter {self.pc} must be positive")
        if any(c < 0 for c in self.counters):
            raise MachineError(f"negative counter value in {self.counters}")

    def __str__(self):
        return "(" + ", ".join(str(v) for v in (self.pc,) + self.counters) + ")"


@dataclass(frozen=True)
class Run:
    machine: CounterMachine
    configs: tuple
    errors: tuple = ()  # per step, a tuple of k increments
    halted: bool = False
    truncated: bool = False

    def __len__(self):
        return len(self.configs)

    @property
    def final(self) -> Configuration:
        return self.configs[-1]


def initial(m: CounterMachine) -> Configuration:
    return Configuration(1, (0,) * m.k)


def step(m: CounterMachine, c: Configuration, errors: Optional[Sequence[int]] = None) -> Configuration:
    """One move; ``errors`` adds incremental errors to the counters afterwards.

    Decrementing a zero counter leaves it at zero.
    """
    ins = m.instruction(c.pc)
    if isinstance(ins, Halt):
        raise MachineError(f"cannot step from the halt instruction p{c.pc}")
    vals = list(c.counters)
    j = ins.counter - 1
    if isinstance(ins, Inc):
        vals[j] += 1
        pc = ins.goto
    elif isinstance(ins, Dec):
        vals[j] = max(0, vals[j] - 1)
        pc = ins.goto
    else:
        pc = ins.goto_zero if vals[j] == 0 else ins.goto_nonzero
    if errors is not None:
        if len(errors) != m.k or any(e < 0 for e in errors):
            raise MachineError(f"error increments must be {m.k} nonnegative integers, got {tuple(errors)}")
        vals = [v + e for v, e in zip(vals, errors)]
    return Configuration(pc, tuple(vals))


def run(m: CounterMachine, max_steps: int = 1000, error_schedule: Optional[Mapping[int, Sequence[int]]] = None) -> Run:
    """Run from ``(1, 0..0)``.  ``error_schedule`` maps a 1-based step number to increments."""
    if max_steps < 1:
        raise MachineError("max_steps must be at least 1")
    schedule = dict(error_schedule or {})
    zero = (0,) * m.k
    configs = [initial(m)]
    errors = []
    for s in range(1, max_steps + 1):
        if isinstance(m.instruction(configs[-1].pc), Halt):
            return Run(m, tuple(configs), tuple(errors), halted=True)
        e = tuple(schedule.get(s, zero))
        configs.append(step(m, configs[-1], e))
        errors.append(e)
    halted = isinstance(m.instruction(configs[-1].pc), Halt)
    return Run(m, tuple(configs), tuple(errors), halted=halted, truncated=not halted)


# -- text format -----------------------------------------------------------------------

_LINE = re.compile(r"^(\d+)\s*:\s*(.*)$")


def parse_machine(text: str) -> tuple:
    """Parse ``counters: k``, numbered instructions and ``step s: +e1 .. +ek`` lines.

    Returns ``(machine, error_schedule)``.
    """
    k = None
    instructions = {}
    schedule = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("counters:"):
            k = int(line.split(":", 1)[1])
            continue
        if line.startswith("step"):
            head, _, body = line.partition(":")
            try:
                s = int(head.split()[1])
                incs = tuple(int(tok) for tok in body.split())
            except (IndexError, ValueError):
                raise MachineError(f"line {lineno}: malformed error schedule line {raw!r}") from None
            schedule[s] = incs
            continue
        match = _LINE.match(line)
        if not match:
            raise MachineError(f"line {lineno}: cannot parse {raw!r}")
        idx, body = int(match.group(1)), match.group(2).split()
        try:
            if body == ["halt"]:
                ins = Halt()
            elif body[0] == "inc" and body[2] == "goto" and len(body) == 4:
                ins = Inc(int(body[1]), int(body[3]))
            elif body[0] == "dec" and body[2] == "goto" and len(body) == 4:
                ins = Dec(int(body[1]), int(body[3]))
            elif body[0] == "ifz" and body[2] == "goto" and body[4] == "else" and len(body) == 6:
                ins = IfZero(int(body[1]), int(body[3]), int(body[5]))
            else:
                raise IndexError
        except (IndexError, ValueError):
            raise MachineError(f"line {lineno}: unknown instruction {raw!r}") from None
        if idx in instructions:
            raise MachineError(f"line {lineno}: instruction {idx} defined twice")
        instructions[idx] = ins
    if k is None:
        raise MachineError("missing 'counters: k' line")
    if sorted(instructions) != list(range(1, len(instructions) + 1)):
        raise MachineError(f"instructions must be numbered 1..n, got {sorted(instructions)}")
    m = CounterMachine(k, tuple(instructions[i] for i in sorted(instructions)))
    for s, incs in schedule.items():
        if len(incs) != k or any(e < 0 for e in incs):
            raise MachineError(f"step {s}: expected {k} nonnegative increments")
    return m, schedule


def format_machine(m: CounterMachine, schedule: Optional[Mapping] = None) -> str:
    lines = [f"counters: {m.k}"]
    lines += [f"{i}: {ins}" for i, ins in enumerate(m.instructions, start=1)]
    for s in sorted(schedule or {}):
        lines.append(f"step {s}: " + " ".join(f"+{e}" for e in schedule[s]))
    return "\n".join(lines) + "\n"


def format_run(r: Run) -> str:
    lines = [f"{i}: {c}" for i, c in enumerate(r.configs)]
    lines.append("halted" if r.halted else "truncated")
    return "\n".join(lines) + "\n"


# -- alphabet -----------------------------------------------------------------------------


def s_prop(p: int) -> str:
    return f"s.p{p}"


def f_prop(p: int) -> str:
    return f"f.p{p}"


def a_prop(j: int) -> str:
    return f"a.{j}"


def b_prop(j: int) -> str:
    return f"b.{j}"


def alphabet(m: CounterMachine) -> list:
    out = [s_prop(p) for p in range(1, m.n + 1)] + [f_prop(p) for p in range(1, m.n + 1)]
    for j in range(1, m.k + 1):
        out += [a_prop(j), b_prop(j)]
    return out


# -- encoding ------------------------------------------------------------------------------


class EncodingError(RuntimeError):
    pass


def _config_points(start, pairs, finish):
    pts = [start]
    for j in sorted(pairs):
        for ta, tb in pairs[j]:
            pts += [ta, tb]
    pts.append(finish)
    return pts


def encode_run(r: Run, check: bool = True) -> TimedWord:
    """A timed word for a halting run, one configuration per unit interval.

    Configuration i is ``s^pc (a1 b1)^c1 .. (ak bk)^ck f^pc`` inside [i, i+1).
    With eta a quarter of the smallest gap of configuration i, the next one
    puts its s marker at s+1+eta, every copied symbol at t+1-eta and its f
    marker at f+1-eta/2.  Appended pairs (increments and errors) are spread
    evenly over the gap they are inserted into: increment pairs right after
    the copied pairs of their counter, error pairs before them.  With
    ``check`` the result is evaluated against the machine's formula.
    """
    m = r.machine
    if not r.halted:
        raise EncodingError("only halting runs can be encoded")
    k = m.k
    s_t, f_t = Fraction(0), Fraction(1, 2)
    pairs = {j: [] for j in range(1, k + 1)}
    events = []

    def emit(pc, s_time, prs, f_time):
        events.append(([s_prop(pc)], s_time))
        for j in range(1, k + 1):
            for ta, tb in prs[j]:
                events.append(([a_prop(j)], ta))
                events.append(([b_prop(j)], tb))
        events.append(([f_prop(pc)], f_time))

    emit(r.configs[0].pc, s_t, pairs, f_t)
    for i in range(len(r.configs) - 1):
        src, dst = r.configs[i], r.configs[i + 1]
        ins = m.instruction(src.pc)
        err = r.errors[i] if i < len(r.errors) else (0,) * k
        pts = _config_points(s_t, pairs, f_t)
        eta = min(b - a for a, b in zip(pts, pts[1:])) / 4
        # slots: fixed times or None for appended points, in word order
        slots = [("s", s_t + 1 + eta)]
        for j in range(1, k + 1):
            keep = list(pairs[j])
            if isinstance(ins, Dec) and ins.counter == j and keep:
                keep = keep[:-1]
            slots += [("pair", None)] * err[j - 1]
            for ta, tb in keep:
                slots += [("a", ta + 1 - eta), ("b", tb + 1 - eta)]
            if isinstance(ins, Inc) and ins.counter == j:
                slots += [("pair", None)]
        slots.append(("f", f_t + 1 - eta / 2))
        times = _place(slots)
        s_t, f_t = times[0], times[-1]
        new_pairs = {j: [] for j in range(1, k + 1)}
        cursor = 1
        for j in range(1, k + 1):
            count = dst.counters[j - 1]
            for _ in range(count):
                new_pairs[j].append((times[cursor], times[cursor + 1]))
                cursor += 2
        if cursor != len(times) - 1:
            raise EncodingError("placed symbols do not match the successor configuration")
        pairs = new_pairs
        emit(dst.pc, s_t, pairs, f_t)
    word = TimedWord(events)
    if check:
        bad = failing_conjuncts(word, m, exact=not any(any(e) for e in r.errors))
        if bad:
            raise EncodingError(f"encoding violates {', '.join(bad)}")
    return word


def _place(slots) -> list:
    """Expand ``pair`` slots into two points each and give every point a time."""
    points = []
    for kind, t in slots:
        if kind == "pair":
            points += [None, None]
        else:
            points.append(t)
    out = list(points)
    idx = 0
    while idx < len(out):
        if out[idx] is not None:
            idx += 1
            continue
        end = idx
        while out[end] is None:
            end += 1
        lo, hi = out[idx - 1], out[end]
        gap = end - idx + 1
        for r in range(idx, end):
            out[r] = lo + (hi - lo) * (r - idx + 1) / gap
        idx = end
    for a, b in zip(out, out[1:]):
        if not a < b:
            raise EncodingError("timestamp placement is not strictly increasing")
    return out


def untimed_pattern(m: CounterMachine) -> str:
    """Regular expression for the untimed projection, over space-separated props."""
    blocks = "".join(rf"(?:a\.{j} b\.{j} )*" for j in range(1, m.k + 1))
    return rf"^(?:s\.p(\d+) {blocks}f\.p\1 )*$"


def untimed(word: TimedWord) -> str:
    return "".join(" ".join(sorted(e.props)) + " " for e in word)


# -- formulas --------------------------------------------------------------------------------

X = "x"


def _tx(lo, hi, lo_closed=False, hi_closed=False):
    return TMinusX(X, Interval(lo, hi, lo_closed, hi_closed))


def _xt(lo, hi):
    return XMinusT(X, Interval(lo, hi, False, False))


class _Macros:
    """Shared subtrees for one machine, so the formula stays linear in n*k."""

    def __init__(self, m: CounterMachine):
        self.m = m
        n, k = m.n, m.k
        self.s = {p: Atom(s_prop(p)) for p in range(1, n + 1)}
        self.f = {p: Atom(f_prop(p)) for p in range(1, n + 1)}
        self.a = {j: Atom(a_prop(j)) for j in range(1, k + 1)}
        self.b = {j: Atom(b_prop(j)) for j in range(1, k + 1)}
        self.S = disj_chain(self.s[p] for p in range(1, n + 1))
        self.F = disj_chain(self.f[p] for p in range(1, n + 1))
        self.not_S = Not(self.S)
        self.not_F = Not(self.F)
        # A_j: some counter >= j
        self.A = {k + 1: FALSE}
        for j in range(k, 0, -1):
            self.A[j] = self.a[j] if j == k else Or(self.a[j], self.A[j + 1])
        self.block_end = {j: Or(self.F, self.A[j + 1]) for j in range(1, k + 1)}
        self.last_a = {j: And(self.a[j], Next(Next(self.block_end[j]))) for j in self.a}
        self.last_b = {j: And(self.b[j], Next(self.block_end[j])) for j in self.b}
        self.nl_a = {j: And(self.a[j], Not(self.last_a[j])) for j in self.a}
        self.nl_b = {j: And(self.b[j], Not(self.last_b[j])) for j in self.b}
        self.second_last_a = {j: And(self.a[j], Next(Next(self.last_a[j]))) for j in self.a}
        self.psi_nh = Not(Eventually(And(self.f[n], _tx(0, 1))))
        self.box_false = Box(FALSE)

    def within(self, g):
        """At a point of the configuration whose instruction is p_g."""
        return Until(self.not_S, self.f[g])

    def next_pc(self, g, h):
        return BoxNS(Implies(self.s[g], Until(self.not_S, self.s[h])))

    def copy(self, g, skip=()):
        """Copy the last pair of every counter outside ``skip``."""
        parts = []
        for j in sorted(self.a):
            if j in skip:
                continue
            target = Eventually(And(And(self.a[j], _tx(0, 1)),
                                    Next(And(And(self.b[j], _tx(1, 2)), Next(self.block_end[j])))))
            parts.append(BoxNS(Freeze(X, Implies(And(self.last_a[j], self.within(g)), target))))
        return conj_chain(parts) if parts else TRUE


def _phi1(M):
    parts = []
    for p in sorted(M.s):
        parts.append(BoxNS(Implies(M.s[p], Next(Or(M.A[1], M.f[p])))))
        parts.append(BoxNS(Implies(M.s[p], Until(M.not_F, M.f[p]))))
    for j in sorted(M.a):
        parts.append(BoxNS(Implies(M.a[j], Next(M.b[j]))))
        parts.append(BoxNS(Implies(M.b[j], Next(Or(M.A[j], M.F)))))
    for p in sorted(M.f):
        parts.append(BoxNS(Implies(M.f[p], Or(Next(M.S), M.box_false))))
    return conj_chain(parts)


def _phi2(M):
    return Freeze(X, And(M.s[1], Next(And(M.f[1], _tx(0, 1)))))


def _phi3(M):
    n = M.m.n
    s_part = BoxNS(Freeze(X, Implies(
        And(M.S, Not(M.s[n])),
        And(Not(Eventually(And(_tx(0, 1, True, True), M.S))), Eventually(And(M.S, _tx(1, 2)))),
    )))
    f_part = BoxNS(Freeze(X, Implies(And(M.F, Not(M.f[n])), Eventually(And(M.F, _tx(0, 1))))))
    return And(s_part, f_part)


def _phi4(M):
    return BoxNS(Implies(M.f[M.m.n], M.box_false))


def _phi5_distinct(M):
    names = alphabet(M.m)
    parts = []
    for y in names:
        others = disj_chain(Atom(z) for z in names if z != y)
        parts.append(BoxNS(Implies(Atom(y), Not(others))))
    parts.append(BoxNS(Freeze(X, Or(M.box_false, Next(TMinusX(X, Interval(0, INF, False, False)))))))
    return conj_chain(parts)


def _phi6_halt(M):
    return EventuallyNS(M.s[M.m.n])


def _phi7(M):
    parts = []
    for j in sorted(M.a):
        for sym, nl in ((M.a[j], M.nl_a[j]), (M.b[j], M.nl_b[j])):
            body = Eventually(And(And(sym, _tx(0, 1)), Next(_tx(1, 2))))
            parts.append(BoxNS(Freeze(X, Implies(And(nl, M.psi_nh), body))))
    return conj_chain(parts)


def _phi8(M, g):
    ins = M.m.instruction(g)
    sg = M.s[g]
    if isinstance(ins, Halt):
        return TRUE
    j = ins.counter
    aj = M.a[j]
    zero_here = And(sg, Until(Not(aj), M.f[g]))
    nonzero_here = And(sg, Until(M.not_F, aj))
    if isinstance(ins, IfZero):
        d1 = BoxNS(Implies(And(sg, Until(Not(aj), M.F)), Until(M.not_S, M.s[ins.goto_zero])))
        d2 = BoxNS(Implies(nonzero_here, Until(M.not_S, M.s[ins.goto_nonzero])))
        return conj_chain([M.copy(g), d1, d2])
    h = ins.goto
    if isinstance(ins, Inc):
        psi0 = BoxNS(Implies(zero_here, Until(M.not_S, Freeze(X, And(M.s[h], Eventually(And(_tx(0, 1), aj)))))))
        target = Eventually(And(And(_tx(0, 1), aj), Next(Next(And(M.last_a[j], _tx(1, 2))))))
        psi1 = BoxNS(Implies(nonzero_here, Until(M.not_F, Freeze(X, And(M.last_a[j], target)))))
        return conj_chain([M.copy(g, skip=(j,)), M.next_pc(g, h), psi0, psi1])
    # decrement
    unchanged = Until(M.not_S, And(M.s[h], Until(Not(aj), M.F)))
    psi0 = BoxNS(Implies(zero_here, unchanged))
    has_two = And(sg, Until(M.not_F, M.second_last_a[j]))
    target = Eventually(And(And(_tx(0, 1), aj),
                            Next(And(M.b[j], Next(And(M.block_end[j], _tx(1, 2)))))))
    psi1 = BoxNS(Implies(has_two, Until(M.not_F, Freeze(X, And(M.second_last_a[j], target)))))
    psi_one = BoxNS(Implies(And(nonzero_here, Not(Until(M.not_F, M.second_last_a[j]))), unchanged))
    return conj_chain([M.copy(g, skip=(j,)), M.next_pc(g, h), psi0, psi1, psi_one])


def _phi9(M):
    parts = []
    for j in sorted(M.a):
        for sym, nl in ((M.a[j], M.nl_a[j]), (M.b[j], M.nl_b[j])):
            body = EventuallyPast(And(_xt(1, 2), Next(And(sym, _xt(0, 1)))))
            parts.append(BoxNS(Freeze(X, Implies(nl, body))))
    return conj_chain(parts)


def iecm_conjuncts(m: CounterMachine) -> list:
    """The named conjuncts of the incremental-error formula, in order."""
    M = _Macros(m)
    out = [
        ("phi1", _phi1(M)),
        ("phi2", _phi2(M)),
        ("phi3", _phi3(M)),
        ("phi4", _phi4(M)),
        ("phi5_distinct", _phi5_distinct(M)),
        ("phi6_halt", _phi6_halt(M)),
        ("phi7", _phi7(M)),
    ]
    out += [(f"phi8_p{g}", _phi8(M, g)) for g in range(1, m.n + 1)]
    return out


def cm_conjuncts(m: CounterMachine) -> list:
    return iecm_conjuncts(m) + [("phi9", _phi9(_Macros(m)))]


def build_phi_iecm(m: CounterMachine) -> Formula:
    return conj_chain(f for _, f in iecm_conjuncts(m))


def build_phi9(m: CounterMachine) -> Formula:
    return _phi9(_Macros(m))


def build_phi_cm(m: CounterMachine) -> Formula:
    return And(build_phi_iecm(m), build_phi9(m))


def failing_conjuncts(word: TimedWord, m: CounterMachine, exact: bool = False) -> list:
    """Names of the conjuncts false at position 1 of ``word``."""
    ev = Evaluator(word)
    named = cm_conjuncts(m) if exact else iecm_conjuncts(m)
    return [name for name, f in named if not ev.holds(f, 1)]
