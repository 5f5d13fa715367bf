"""Nondeterministic automata over exact-truth letters.

A letter is the exact set of formula names that hold at a point, so an
automaton over a formula set ``S`` reads words over ``2^S``.  Every
automaton leaving this module is epsilon-free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


class AutomatonError(ValueError):
    pass


def letter(*names) -> frozenset:
    if len(names) == 1 and not isinstance(names[0], str):
        return frozenset(names[0])
    return frozenset(names)


def all_letters(formula_set: Iterable[str]) -> list:
    """Every subset of ``formula_set`` in a canonical order (by size, then names)."""
    names = sorted(formula_set)
    return [frozenset(c) for r in range(len(names) + 1) for c in combinations(names, r)]


def format_letter(let: frozenset) -> str:
    return "{" + ",".join(sorted(let)) + "}"


def _letter_key(let: frozenset):
    return (len(let), sorted(let))


@dataclass(frozen=True)
class SymbolicNFA:
    formula_set: frozenset
    states: tuple
    init: str
    final: frozenset
    transitions: frozenset  # of (src, letter, dst)

    def __post_init__(self):
        object.__setattr__(self, "formula_set", frozenset(self.formula_set))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "final", frozenset(self.final))
        object.__setattr__(
            self,
            "transitions",
            frozenset((src, frozenset(let), dst) for src, let, dst in self.transitions),
        )
        known = set(self.states)
        if len(known) != len(self.states):
            raise AutomatonError("duplicate state names")
        if self.init not in known:
            raise AutomatonError(f"initial state {self.init!r} is not a state")
        if not self.final <= known:
            raise AutomatonError(f"accepting states {sorted(self.final - known)} are not states")
        for src, let, dst in self.transitions:
            if src not in known or dst not in known:
                raise AutomatonError(f"transition {src} -> {dst} uses an unknown state")
            if not let <= self.formula_set:
                extra = ",".join(sorted(let - self.formula_set))
                raise AutomatonError(f"letter uses names outside the formula set: {extra}")

    # -- running ----------------------------------------------------------

    def _delta(self):
        table = self.__dict__.get("_delta_cache")
        if table is None:
            table = {}
            for src, let, dst in self.transitions:
                table.setdefault((src, let), set()).add(dst)
            table = {key: frozenset(val) for key, val in table.items()}
            object.__setattr__(self, "_delta_cache", table)
        return table

    def step(self, current: Iterable[str], let: frozenset) -> frozenset:
        let = frozenset(let)
        if not let <= self.formula_set:
            raise AutomatonError(
                f"letter {format_letter(let)} is not over the formula set "
                f"{format_letter(self.formula_set)}"
            )
        delta = self._delta()
        out = set()
        for q in current:
            out |= delta.get((q, let), frozenset())
        return frozenset(out)

    def run(self, word: Sequence[frozenset], start=None) -> frozenset:
        current = frozenset([self.init if start is None else start])
        for let in word:
            current = self.step(current, let)
            if not current:
                break
        return current

    def accepts(self, word: Sequence[frozenset]) -> bool:
        return bool(self.run(word) & self.final)

    @property
    def accepts_empty(self) -> bool:
        return self.init in self.final

    def reachable(self, start=None) -> frozenset:
        seen = {self.init if start is None else start}
        todo = list(seen)
        succ = {}
        for src, _, dst in self.transitions:
            succ.setdefault(src, set()).add(dst)
        while todo:
            q = todo.pop()
            for r in succ.get(q, ()):
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return frozenset(seen)

    def is_empty(self) -> bool:
        return not (self.reachable() & self.final)

    def __str__(self) -> str:
        return format_nfa(self)


def accepts(automaton: SymbolicNFA, word: Sequence[frozenset]) -> bool:
    return automaton.accepts(word)


# -- constructions ------------------------------------------------------------


def _check_same_set(a1: SymbolicNFA, a2: SymbolicNFA):
    if a1.formula_set != a2.formula_set:
        raise AutomatonError(
            f"formula sets differ: {format_letter(a1.formula_set)} vs {format_letter(a2.formula_set)}"
        )


def rewire(automaton: SymbolicNFA, q: str, target=None) -> SymbolicNFA:
    """``A[q, q']`` when ``target`` is a state, ``A[q, F]`` when it is None."""
    if q not in automaton.states:
        raise AutomatonError(f"unknown state {q!r}")
    if target is None:
        final = automaton.final
    elif isinstance(target, str):
        if target not in automaton.states:
            raise AutomatonError(f"unknown state {target!r}")
        final = frozenset([target])
    else:
        final = frozenset(target)
    return SymbolicNFA(automaton.formula_set, automaton.states, q, final, automaton.transitions)


def _epsilon_free(formula_set, states, init, final, transitions, eps) -> SymbolicNFA:
    """Eliminate epsilon moves; ``eps`` maps a state to its direct epsilon successors."""
    closure = {}
    for q in states:
        seen = {q}
        todo = [q]
        while todo:
            r = todo.pop()
            for t in eps.get(r, ()):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        closure[q] = seen
    by_src = {}
    for src, let, dst in transitions:
        by_src.setdefault(src, []).append((let, dst))
    new_trans = set()
    new_final = set()
    for q in states:
        for r in closure[q]:
            if r in final:
                new_final.add(q)
            for let, dst in by_src.get(r, ()):
                new_trans.add((q, let, dst))
    return trim(SymbolicNFA(formula_set, states, init, new_final, new_trans))


def trim(automaton: SymbolicNFA) -> SymbolicNFA:
    """Drop unreachable states and rename the rest canonically (q0 = init)."""
    order = [automaton.init]
    index = {automaton.init: 0}
    succ = {}
    for src, let, dst in automaton.transitions:
        succ.setdefault(src, []).append((let, dst))
    for key in succ:
        succ[key].sort(key=lambda item: (_letter_key(item[0]), str(item[1])))
    pos = 0
    while pos < len(order):
        for _, dst in succ.get(order[pos], ()):
            if dst not in index:
                index[dst] = len(order)
                order.append(dst)
        pos += 1
    # states that cannot reach an accepting state are kept only if needed as sinks of
    # nothing; remove them entirely to keep quotients and products small
    live = set(q for q in order if q in automaton.final)
    changed = True
    while changed:
        changed = False
        for src, _, dst in automaton.transitions:
            if dst in live and src in index and src not in live:
                live.add(src)
                changed = True
    keep = [q for q in order if q in live or q == automaton.init]
    name = {q: f"q{i}" for i, q in enumerate(keep)}
    trans = {
        (name[s], let, name[d])
        for s, let, d in automaton.transitions
        if s in name and d in name and d in live
    }
    final = {name[q] for q in keep if q in automaton.final}
    return SymbolicNFA(automaton.formula_set, tuple(name[q] for q in keep), "q0", final, trans)


def concat(a1: SymbolicNFA, a2: SymbolicNFA) -> SymbolicNFA:
    _check_same_set(a1, a2)
    s1 = [("1", q) for q in a1.states]
    s2 = [("2", q) for q in a2.states]
    names = {st: f"{st[0]}.{st[1]}" for st in s1 + s2}
    trans = {(names[("1", s)], let, names[("1", d)]) for s, let, d in a1.transitions}
    trans |= {(names[("2", s)], let, names[("2", d)]) for s, let, d in a2.transitions}
    eps = {names[("1", q)]: [names[("2", a2.init)]] for q in a1.final}
    return _epsilon_free(
        a1.formula_set,
        tuple(names.values()),
        names[("1", a1.init)],
        {names[("2", q)] for q in a2.final},
        trans,
        eps,
    )


def concat_all(parts: Sequence[SymbolicNFA]) -> SymbolicNFA:
    result = parts[0]
    for part in parts[1:]:
        result = concat(result, part)
    return result


def union(a1: SymbolicNFA, a2: SymbolicNFA) -> SymbolicNFA:
    _check_same_set(a1, a2)
    names = {("1", q): f"1.{q}" for q in a1.states}
    names.update({("2", q): f"2.{q}" for q in a2.states})
    trans = {(names[("1", s)], let, names[("1", d)]) for s, let, d in a1.transitions}
    trans |= {(names[("2", s)], let, names[("2", d)]) for s, let, d in a2.transitions}
    final = {names[("1", q)] for q in a1.final} | {names[("2", q)] for q in a2.final}
    states = ("start",) + tuple(names.values())
    eps = {"start": [names[("1", a1.init)], names[("2", a2.init)]]}
    return _epsilon_free(a1.formula_set, states, "start", final, trans, eps)


def star(a: SymbolicNFA) -> SymbolicNFA:
    names = {q: f"s.{q}" for q in a.states}
    trans = {(names[s], let, names[d]) for s, let, d in a.transitions}
    eps = {"start": [names[a.init]]}
    for q in a.final:
        eps.setdefault(names[q], []).append("start")
    states = ("start",) + tuple(names.values())
    return _epsilon_free(a.formula_set, states, "start", {"start"}, trans, eps)


def left_quotient(a: SymbolicNFA, c: frozenset) -> SymbolicNFA:
    """Accepts ``{w : c.w in L(a)}``."""
    starts = a.step([a.init], frozenset(c))
    names = {q: f"o.{q}" for q in a.states}
    trans = {(names[s], let, names[d]) for s, let, d in a.transitions}
    eps = {"start": sorted(names[q] for q in starts)}
    states = ("start",) + tuple(names.values())
    final = {names[q] for q in a.final}
    return _epsilon_free(a.formula_set, states, "start", final, trans, eps)


def right_quotient(a: SymbolicNFA, c: frozenset) -> SymbolicNFA:
    """Accepts ``{w : w.c in L(a)}``."""
    c = frozenset(c)
    if not c <= a.formula_set:
        raise AutomatonError(f"letter {format_letter(c)} is not over the formula set")
    final = {src for src, let, dst in a.transitions if let == c and dst in a.final}
    return trim(SymbolicNFA(a.formula_set, a.states, a.init, final, a.transitions))


def universal(formula_set: Iterable[str]) -> SymbolicNFA:
    fs = frozenset(formula_set)
    return SymbolicNFA(fs, ("q0",), "q0", {"q0"}, {("q0", let, "q0") for let in all_letters(fs)})


def epsilon_only(formula_set: Iterable[str]) -> SymbolicNFA:
    return SymbolicNFA(frozenset(formula_set), ("q0",), "q0", {"q0"}, ())


def empty_language(formula_set: Iterable[str]) -> SymbolicNFA:
    return SymbolicNFA(frozenset(formula_set), ("q0",), "q0", (), ())


def letters_automaton(formula_set: Iterable[str], letters: Iterable[frozenset]) -> SymbolicNFA:
    """Accepts exactly the one-letter words drawn from ``letters``."""
    fs = frozenset(formula_set)
    trans = {("q0", frozenset(let), "q1") for let in letters}
    return SymbolicNFA(fs, ("q0", "q1"), "q0", {"q1"}, trans)


def nonempty_words(formula_set: Iterable[str]) -> SymbolicNFA:
    """Every word of length at least one."""
    fs = frozenset(formula_set)
    trans = {("q0", let, "q1") for let in all_letters(fs)}
    trans |= {("q1", let, "q1") for let in all_letters(fs)}
    return SymbolicNFA(fs, ("q0", "q1"), "q0", {"q1"}, trans)


def determinize_accepts(a: SymbolicNFA, word: Sequence[frozenset]) -> bool:
    """Membership through an explicit subset construction (used as a cross-check)."""
    start = frozenset([a.init])
    table = {}
    current = start
    for let in word:
        key = (current, frozenset(let))
        if key not in table:
            table[key] = a.step(current, let)
        current = table[key]
    return bool(current & a.final)


# -- regular expressions --------------------------------------------------------


@dataclass(frozen=True)
class RLetter:
    letter: frozenset


@dataclass(frozen=True)
class REps:
    pass


@dataclass(frozen=True)
class REmpty:
    pass


@dataclass(frozen=True)
class RCat:
    left: object
    right: object


@dataclass(frozen=True)
class RAlt:
    left: object
    right: object


@dataclass(frozen=True)
class RStar:
    arg: object


_REGEX_TOKEN = re.compile(r"\s*(?:(\{[^}]*\})|(eps|ε)|(empty|∅)|([().+*]))")


def parse_regex(text: str):
    """Parse ``({a}.{a})*.{b}``: letters in braces, ``.`` concat, ``+`` union, ``*``."""
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _REGEX_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise AutomatonError(f"regex syntax error at column {pos + 1}: {text[pos:pos + 10]!r}")
        if m.group(1):
            body = m.group(1)[1:-1]
            names = [n.strip() for n in body.split(",") if n.strip()]
            tokens.append(("L", frozenset(names)))
        elif m.group(2):
            tokens.append(("EPS", None))
        elif m.group(3):
            tokens.append(("EMPTY", None))
        else:
            tokens.append((m.group(4), None))
        pos = m.end()
    tokens.append(("END", None))
    idx = 0

    def peek():
        return tokens[idx][0]

    def take(kind):
        nonlocal idx
        if tokens[idx][0] != kind:
            raise AutomatonError(f"regex syntax error: expected {kind!r}, found {tokens[idx][0]!r}")
        tok = tokens[idx]
        idx += 1
        return tok

    def alt():
        node = cat()
        while peek() == "+":
            take("+")
            node = RAlt(node, cat())
        return node

    def cat():
        node = rep()
        while peek() in (".", "L", "(", "EPS", "EMPTY"):
            if peek() == ".":
                take(".")
            node = RCat(node, rep())
        return node

    def rep():
        node = atom()
        while peek() == "*":
            take("*")
            node = RStar(node)
        return node

    def atom():
        kind = peek()
        if kind == "L":
            return RLetter(take("L")[1])
        if kind == "EPS":
            take("EPS")
            return REps()
        if kind == "EMPTY":
            take("EMPTY")
            return REmpty()
        if kind == "(":
            take("(")
            node = alt()
            take(")")
            return node
        raise AutomatonError(f"regex syntax error: unexpected {kind!r}")

    tree = alt()
    take("END")
    return tree


def regex_letters(tree) -> set:
    if isinstance(tree, RLetter):
        return {tree.letter}
    if isinstance(tree, (RCat, RAlt)):
        return regex_letters(tree.left) | regex_letters(tree.right)
    if isinstance(tree, RStar):
        return regex_letters(tree.arg)
    return set()


def compile_regex(expr, formula_set: Iterable[str] | None = None) -> SymbolicNFA:
    """Thompson construction followed by epsilon elimination."""
    tree = parse_regex(expr) if isinstance(expr, str) else expr
    if formula_set is None:
        formula_set = frozenset().union(*regex_letters(tree)) if regex_letters(tree) else frozenset()
    fs = frozenset(formula_set)
    for let in regex_letters(tree):
        if not let <= fs:
            raise AutomatonError(
                f"regex letter {format_letter(let)} is not over {format_letter(fs)}"
            )
    counter = [0]
    trans = set()
    eps = {}

    def fresh():
        counter[0] += 1
        return f"t{counter[0]}"

    def build(node):
        start, end = fresh(), fresh()
        if isinstance(node, RLetter):
            trans.add((start, node.letter, end))
        elif isinstance(node, REps):
            eps.setdefault(start, []).append(end)
        elif isinstance(node, REmpty):
            pass
        elif isinstance(node, RCat):
            s1, e1 = build(node.left)
            s2, e2 = build(node.right)
            eps.setdefault(start, []).append(s1)
            eps.setdefault(e1, []).append(s2)
            eps.setdefault(e2, []).append(end)
        elif isinstance(node, RAlt):
            for part in (node.left, node.right):
                s, e = build(part)
                eps.setdefault(start, []).append(s)
                eps.setdefault(e, []).append(end)
        elif isinstance(node, RStar):
            s, e = build(node.arg)
            eps.setdefault(start, []).extend([s, end])
            eps.setdefault(e, []).extend([s, end])
        else:
            raise AutomatonError(f"unknown regex node {node!r}")
        return start, end

    start, end = build(tree)
    states = tuple(f"t{i}" for i in range(1, counter[0] + 1))
    return _epsilon_free(fs, states, start, {end}, trans, eps)


def regex_matches(tree, word: Sequence[frozenset]) -> bool:
    """Direct backtracking-free regex membership by span dynamic programming."""
    word = [frozenset(w) for w in word]
    n = len(word)
    memo = {}

    def m(node, i, j):
        key = (id(node), i, j)
        if key in memo:
            return memo[key]
        if isinstance(node, RLetter):
            res = j == i + 1 and word[i] == node.letter
        elif isinstance(node, REps):
            res = i == j
        elif isinstance(node, REmpty):
            res = False
        elif isinstance(node, RAlt):
            res = m(node.left, i, j) or m(node.right, i, j)
        elif isinstance(node, RCat):
            res = any(m(node.left, i, k) and m(node.right, k, j) for k in range(i, j + 1))
        elif isinstance(node, RStar):
            res = i == j or any(m(node.arg, i, k) and m(node, k, j) for k in range(i + 1, j + 1))
        else:
            raise AutomatonError(f"unknown regex node {node!r}")
        memo[key] = res
        return res

    tree = parse_regex(tree) if isinstance(tree, str) else tree
    return m(tree, 0, n)


# -- text format ------------------------------------------------------------------


def format_nfa(a: SymbolicNFA, inline: bool = False) -> str:
    """Render in the file format, or the one-line ``<...>`` form when ``inline``."""
    trans = sorted(a.transitions, key=lambda t: (str(t[0]), _letter_key(t[1]), str(t[2])))
    parts = [
        "S: " + " ".join(sorted(a.formula_set)),
        "states: " + " ".join(a.states),
        "init: " + a.init,
        "final: " + " ".join(q for q in a.states if q in a.final),
    ]
    parts += [f"{s} -{format_letter(let)}-> {d}" for s, let, d in trans]
    if inline:
        return "<" + "; ".join(p.rstrip() for p in parts) + ">"
    return "\n".join(p.rstrip() for p in parts) + "\n"


_TRANS_RE = re.compile(r"^(\S+)\s*-\{([^}]*)\}->\s*(\S+)$")


def parse_nfa(text: str, formula_set: Iterable[str] | None = None) -> SymbolicNFA:
    """Parse the file format; lines may also be separated by ``;``."""
    fs = None if formula_set is None else frozenset(formula_set)
    states = init = None
    final = []
    trans = []
    for lineno, raw in enumerate(re.split(r"[\n;]", text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _TRANS_RE.match(line)
        if m:
            names = frozenset(n.strip() for n in m.group(2).split(",") if n.strip())
            trans.append((m.group(1), names, m.group(3)))
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        values = rest.split()
        if key == "S":
            declared = frozenset(values)
            if fs is not None and declared != fs:
                raise AutomatonError("declared formula set does not match")
            fs = declared
        elif key == "states":
            states = values
        elif key == "init":
            if len(values) != 1:
                raise AutomatonError(f"item {lineno}: exactly one initial state expected")
            init = values[0]
        elif key == "final":
            final = values
        else:
            raise AutomatonError(f"item {lineno}: cannot parse {line!r}")
    if states is None or init is None:
        raise AutomatonError("automaton needs 'states:' and 'init:' entries")
    if fs is None:
        fs = frozenset().union(*(t[1] for t in trans)) if trans else frozenset()
    return SymbolicNFA(fs, states, init, final, trans)


def same_language_upto(a1: SymbolicNFA, a2: SymbolicNFA, max_len: int) -> bool:
    _check_same_set(a1, a2)
    letters = all_letters(a1.formula_set)
    frontier = [()]
    for _ in range(max_len + 1):
        for w in frontier:
            if a1.accepts(w) != a2.accepts(w):
                return False
        frontier = [w + (let,) for w in frontier for let in letters]
    return True
