"""Timed temporal logics (MTL, TPTL, automata modalities) over finite timed words."""

from .timedword import Interval, TimedWord, format_word, parse_word
from .formula import Formula
from .syntax import parse, to_text
from .evaluator import Evaluator, evaluate, satisfies
from .classify import classify

__all__ = [
    "Interval", "TimedWord", "format_word", "parse_word", "Formula", "parse", "to_text",
    "Evaluator", "evaluate", "satisfies", "classify",
]
__version__ = "0.1.0"
