"""Parser learning and design search for technical drawings."""

__version__ = "0.1.0"

from .drawing import BoundingBox, Cell, Drawing, load_drawing, serialize_drawing
from .ilp import LearningTask, SearchParams, evaluate, induce, parse_bias
from .logic import Atom, Clause, Const, FactSet, KB, Var, parse_program, prove, unify
from .mining import Pattern, PatternSet, mine, vectorize
from .probtext import EditPenalties, ProbString, best_match, prob_levenshtein
from .similarity import TriState, combined, rank, sim_tabular, sim_visual

__all__ = [
    "Atom",
    "BoundingBox",
    "Cell",
    "Clause",
    "Const",
    "Drawing",
    "EditPenalties",
    "FactSet",
    "KB",
    "LearningTask",
    "Pattern",
    "PatternSet",
    "ProbString",
    "SearchParams",
    "TriState",
    "Var",
    "best_match",
    "combined",
    "evaluate",
    "induce",
    "load_drawing",
    "mine",
    "parse_bias",
    "parse_program",
    "prob_levenshtein",
    "prove",
    "rank",
    "serialize_drawing",
    "sim_tabular",
    "sim_visual",
    "unify",
    "vectorize",
]
