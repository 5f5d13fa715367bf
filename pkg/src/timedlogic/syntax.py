"""Text syntax for formulas: a recursive-descent parser and a printer.

Grammar (loosest binding first)::

    formula   := imp ('<->' imp)*
    imp       := or ('->' imp)?
    or        := and ('|' and)*
    and       := temporal ('&' temporal)*
    temporal  := unary (BINOP temporal)?            right associative
    BINOP     := ('U' | 'S') iv? | 'Uns' | 'Sns'
    unary     := '!' unary | UNOP iv? unary | 'Fns' unary | 'Gns' unary | primary
    UNOP      := 'F' | 'G' | 'P<>' | 'PG' | 'O' | 'Obar'
    primary   := 'true' | 'false' | '(' formula ')' | IDENT '.' '(' formula ')'
               | 'T' '-' IDENT 'in' INTERVAL | IDENT '-' 'T' 'in' INTERVAL
               | IDENT 'in' INTERVAL | automod | IDENT
    iv        := '[' INTERVAL ']'
    automod   := ('Rat'|'FRat'|'PRat') iv '(' aut ';' defs ')'
               | ('Fk'|'Pk') '[' INTERVAL (';' INTERVAL)* ']' '(' aut ('|' aut)* ';' defs ')'
    aut       := '/' regex '/' | '<' inline automaton '>'
    defs      := IDENT ':=' formula (',' IDENT ':=' formula)*

``F`` is eventually, ``G`` always, ``P<>``/``PG`` their past forms, ``O``
next and ``Obar`` previous.  ``x in I`` abbreviates ``T-x in I``.
Identifiers may contain inner dots (``s.p3``); a freeze is therefore
written ``x.(...)`` with the parenthesis.
"""

from __future__ import annotations

import re

from . import automata as am
from .formula import (
    AUTOMATA_NODES, FALSE, TRUE, And, Atom, Box, BoxNS, BoxPast, Eventually,
    EventuallyNS, EventuallyPast, FalseF, Fk, Formula, FRat, Freeze, Iff, Implies,
    Next, Not, Or, Pk, PRat, Prev, Rat, Since, SinceNS, TMinusX, TrueF, Until,
    UntilNS, XMinusT, free_vars,
)
from .timedword import Interval, IntervalError, parse_interval


class ParseError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


KEYWORDS = {
    "true", "false", "U", "S", "Uns", "Sns", "F", "G", "PG", "O", "Obar", "Fns", "Gns",
    "T", "in", "Rat", "FRat", "PRat", "Fk", "Pk", "inf",
}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z0-9_]+)*")
_IDENT_SIMPLE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INTERVAL = re.compile(r"[\[(]\s*[+-]?(?:\d+|inf|oo)\s*,\s*[+-]?(?:\d+|inf|oo)\s*[\])]")

_UNARY = {
    "F": Eventually, "G": Box, "PG": BoxPast, "O": Next, "Obar": Prev,
}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # -- scanning helpers

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, message, pos=None):
        line, col = self.where(pos)
        raise ParseError(message, line, col)

    def skip(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl
            else:
                break

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def eat(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.eat(s):
            found = self.text[self.pos:self.pos + 12] or "end of input"
            self.fail(f"expected {s!r}, found {found!r}")

    def peek_ident(self, simple=False):
        self.skip()
        m = (_IDENT_SIMPLE if simple else _IDENT).match(self.text, self.pos)
        return m.group(0) if m else None

    def peek_word(self, word: str) -> bool:
        ident = self.peek_ident(simple=True)
        return ident == word

    def take_ident(self, simple=False) -> str:
        ident = self.peek_ident(simple)
        if ident is None:
            self.fail("expected an identifier")
        self.pos += len(ident)
        return ident

    def interval(self) -> Interval:
        self.skip()
        m = _INTERVAL.match(self.text, self.pos)
        if not m:
            self.fail("expected an interval such as (1,2) or [0,inf)")
        try:
            iv = parse_interval(m.group(0))
        except IntervalError as exc:
            self.fail(str(exc))
        self.pos = m.end()
        return iv

    def opt_interval(self):
        self.skip()
        if self.text.startswith("[", self.pos):
            save = self.pos
            self.pos += 1
            self.skip()
            if self.pos < len(self.text) and self.text[self.pos] in "[(":
                iv = self.interval()
                self.expect("]")
                return iv
            self.pos = save
        return None

    # -- grammar

    def parse_all(self) -> Formula:
        f = self.formula()
        self.skip()
        if self.pos != len(self.text):
            self.fail(f"unexpected text {self.text[self.pos:self.pos + 12]!r}")
        return f

    def formula(self) -> Formula:
        left = self.imp()
        while self.eat("<->"):
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek("->"):
            self.pos += 2
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek("|") and not self.peek("||"):
            self.pos += 1
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.temporal()
        while self.eat("&"):
            left = And(left, self.temporal())
        return left

    def temporal(self) -> Formula:
        left = self.unary()
        word = self.peek_ident(simple=True)
        if word in ("U", "S"):
            self.pos += 1
            iv = self.opt_interval()
            right = self.temporal()
            return (Until if word == "U" else Since)(left, right, iv)
        if word in ("Uns", "Sns"):
            self.pos += 3
            right = self.temporal()
            return (UntilNS if word == "Uns" else SinceNS)(left, right)
        return left

    def unary(self) -> Formula:
        if self.eat("!"):
            return Not(self.unary())
        if self.peek("P<>"):
            self.pos += 3
            iv = self.opt_interval()
            return EventuallyPast(self.unary(), iv)
        word = self.peek_ident(simple=True)
        if word in _UNARY:
            self.pos += len(word)
            iv = self.opt_interval()
            return _UNARY[word](self.unary(), iv)
        if word in ("Fns", "Gns"):
            self.pos += 3
            arg = self.unary()
            return EventuallyNS(arg) if word == "Fns" else BoxNS(arg)
        return self.primary()

    def primary(self) -> Formula:
        self.skip()
        start = self.pos
        if self.eat("("):
            f = self.formula()
            self.expect(")")
            return f
        word = self.peek_ident(simple=True)
        if word is None:
            self.fail("expected a formula")
        if word == "true":
            self.pos += 4
            return TRUE
        if word == "false":
            self.pos += 5
            return FALSE
        if word in ("Rat", "FRat", "PRat", "Fk", "Pk"):
            self.pos += len(word)
            return self.automod(word)
        if word == "T":
            self.pos += 1
            self.expect("-")
            var = self.take_ident(simple=True)
            self.expect_word("in")
            return TMinusX(var, self.interval())
        # freeze: simple identifier directly followed by ".("
        m = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\.\s*\(").match(self.text, self.pos)
        if m and m.group(1) not in KEYWORDS:
            self.pos += len(m.group(1)) + 1
            self.expect("(")
            body = self.formula()
            self.expect(")")
            return Freeze(m.group(1), body)
        ident = self.peek_ident()
        if ident in KEYWORDS:
            self.fail(f"unexpected keyword {ident!r}")
        self.pos += len(ident)
        save = self.pos
        if self.eat("-") and not self.text.startswith(">", self.pos):
            if self.peek_word("T"):
                self.pos += 1
                self.expect_word("in")
                return XMinusT(self._var(ident, start), self.interval())
        self.pos = save
        if self.peek_word("in"):
            self.pos += 2
            return TMinusX(self._var(ident, start), self.interval())
        return Atom(ident)

    def _var(self, ident, start):
        if "." in ident:
            self.fail(f"{ident!r} is not a valid clock variable", start)
        return ident

    def expect_word(self, word):
        if not self.peek_word(word):
            self.fail(f"expected {word!r}")
        self.pos += len(word)

    def automod(self, kind) -> Formula:
        self.expect("[")
        intervals = [self.interval()]
        while self.eat(";"):
            intervals.append(self.interval())
        self.expect("]")
        if kind in ("Rat", "FRat", "PRat") and len(intervals) != 1:
            self.fail(f"{kind} takes exactly one interval")
        self.expect("(")
        auts = [self.automaton_text()]
        while self.eat("|"):
            auts.append(self.automaton_text())
        self.expect(";")
        defs = []
        names = []
        while True:
            name = self.take_ident(simple=True)
            self.expect(":=")
            defs.append((name, self.formula()))
            names.append(name)
            if not self.eat(","):
                break
        self.expect(")")
        built = []
        for src, pos in auts:
            try:
                if src.startswith("/"):
                    built.append(am.compile_regex(src[1:-1], names))
                else:
                    built.append(am.parse_nfa(src[1:-1], names))
            except am.AutomatonError as exc:
                self.fail(str(exc), pos)
        try:
            if kind in ("Rat", "FRat", "PRat"):
                if len(built) != 1:
                    self.fail(f"{kind} takes exactly one automaton")
                cls = {"Rat": Rat, "FRat": FRat, "PRat": PRat}[kind]
                return cls(intervals[0], built[0], tuple(defs))
            return (Fk if kind == "Fk" else Pk)(tuple(intervals), tuple(built), tuple(defs))
        except ValueError as exc:
            self.fail(str(exc))

    def automaton_text(self):
        self.skip()
        start = self.pos
        if self.eat("/"):
            end = self.text.find("/", self.pos)
            if end < 0:
                self.fail("unterminated regular expression", start)
            self.pos = end + 1
            return self.text[start:self.pos], start
        if self.eat("<"):
            i = self.pos
            while i < len(self.text):
                if self.text[i] == ">" and self.text[i - 1] != "-":
                    break
                i += 1
            else:
                self.fail("unterminated inline automaton", start)
            self.pos = i + 1
            return self.text[start:self.pos], start
        self.fail("expected an automaton: /regex/ or <inline automaton>")


def parse(text: str, allow_free: bool = False) -> Formula:
    """Parse ``text``; constraints must be bound by a freeze unless ``allow_free``."""
    f = _Parser(text).parse_all()
    if not allow_free:
        free = free_vars(f)
        if free:
            raise ParseError(f"unbound freeze variable(s): {', '.join(sorted(free))}")
    return f


# -- printer ---------------------------------------------------------------------

_PREC_IFF, _PREC_IMP, _PREC_OR, _PREC_AND, _PREC_TEMP, _PREC_UNARY, _PREC_ATOM = range(1, 8)


def _prec(f: Formula) -> int:
    if isinstance(f, Iff):
        return _PREC_IFF
    if isinstance(f, Implies):
        return _PREC_IMP
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, (Until, Since, UntilNS, SinceNS)):
        return _PREC_TEMP
    if isinstance(f, (Not, Eventually, EventuallyPast, Box, BoxPast, Next, Prev,
                      EventuallyNS, BoxNS)):
        return _PREC_UNARY
    return _PREC_ATOM


def _iv(iv) -> str:
    return "" if iv is None else f"[{iv}]"


_UNARY_NAMES = {
    Eventually: "F", EventuallyPast: "P<>", Box: "G", BoxPast: "PG", Next: "O", Prev: "Obar",
}


def to_text(f: Formula) -> str:
    out = []
    _emit(f, out)
    return "".join(out)


def _wrap(f, out, need):
    if need:
        out.append("(")
        _emit(f, out)
        out.append(")")
    else:
        _emit(f, out)


def _emit(f: Formula, out: list):
    # explicit stack would be faster, but formulas here are shallow enough
    if isinstance(f, Atom):
        out.append(f.name)
    elif isinstance(f, TrueF):
        out.append("true")
    elif isinstance(f, FalseF):
        out.append("false")
    elif isinstance(f, Not):
        out.append("!")
        _wrap(f.arg, out, _prec(f.arg) < _PREC_UNARY)
    elif isinstance(f, tuple(_UNARY_NAMES)):
        out.append(_UNARY_NAMES[type(f)] + _iv(f.interval) + " ")
        _wrap(f.arg, out, _prec(f.arg) < _PREC_UNARY)
    elif isinstance(f, (EventuallyNS, BoxNS)):
        out.append("Fns " if isinstance(f, EventuallyNS) else "Gns ")
        _wrap(f.arg, out, _prec(f.arg) < _PREC_UNARY)
    elif isinstance(f, (Until, Since, UntilNS, SinceNS)):
        op = {Until: "U", Since: "S", UntilNS: "Uns", SinceNS: "Sns"}[type(f)]
        if isinstance(f, (Until, Since)):
            op += _iv(f.interval)
        _wrap(f.left, out, _prec(f.left) <= _PREC_TEMP)
        out.append(f" {op} ")
        _wrap(f.right, out, _prec(f.right) <= _PREC_TEMP)
    elif isinstance(f, (And, Or)):
        p = _prec(f)
        _wrap(f.left, out, _prec(f.left) < p)
        out.append(" & " if isinstance(f, And) else " | ")
        _wrap(f.right, out, _prec(f.right) <= p)
    elif isinstance(f, Implies):
        _wrap(f.left, out, _prec(f.left) <= _PREC_IMP)
        out.append(" -> ")
        _wrap(f.right, out, _prec(f.right) < _PREC_IMP)
    elif isinstance(f, Iff):
        _wrap(f.left, out, _prec(f.left) < _PREC_IFF)
        out.append(" <-> ")
        _wrap(f.right, out, _prec(f.right) <= _PREC_IFF)
    elif isinstance(f, Freeze):
        out.append(f"{f.var}.(")
        _emit(f.body, out)
        out.append(")")
    elif isinstance(f, TMinusX):
        out.append(f"T-{f.var} in {f.interval}")
    elif isinstance(f, XMinusT):
        out.append(f"{f.var}-T in {f.interval}")
    elif isinstance(f, AUTOMATA_NODES):
        name = type(f).__name__
        if isinstance(f, (Fk, Pk)):
            ivs = ";".join(str(iv) for iv in f.intervals)
            auts = " | ".join(am.format_nfa(a, inline=True) for a in f.automata)
        else:
            ivs = str(f.interval)
            auts = am.format_nfa(f.automaton, inline=True)
        out.append(f"{name}[{ivs}]({auts}; ")
        for idx, (n, g) in enumerate(f.formulas):
            if idx:
                out.append(", ")
            out.append(f"{n} := ")
            _emit(g, out)
        out.append(")")
    else:
        raise TypeError(f"cannot print {type(f).__name__}")


def print_formula(f: Formula) -> str:
    return to_text(f)
