"""Tabular, visual and combined similarities; three-valued pattern evaluation
on partial designs; ranking of an indexed design database."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .logic import KB, Atom, Const, FactSet, Term, Var, holds
from .mining import FeatureVector, Pattern, PatternSet

DEFAULT_ALPHA = 0.5
SCORE_FLOOR = 1e-6  # geometric-mean floor so one zero keeps ordering info


class SimilarityError(ValueError):
    pass


class NoInformativeFeaturesError(SimilarityError):
    """Every pattern is Unknown on the partial design."""


def sim_tabular(x: Sequence[int], y: Sequence[int]) -> float:
    """Complement of the normalized Hamming distance of two binary vectors."""
    xb = x.bits if isinstance(x, FeatureVector) else tuple(x)
    yb = y.bits if isinstance(y, FeatureVector) else tuple(y)
    if len(xb) != len(yb):
        raise SimilarityError(f"vector lengths differ: {len(xb)} != {len(yb)}")
    if not xb:
        raise SimilarityError("empty feature vectors")
    return 1.0 - sum(abs(a - b) for a, b in zip(xb, yb)) / len(xb)


def sim_visual(x: Sequence[float], y: Sequence[float]) -> float:
    """Cosine similarity clamped to [0, 1].

    Cosine cannot mathematically exceed 1, so values within 1e-12 of 1 are
    rounding residue of equal or proportional vectors and snap to exactly 1.
    """
    if len(x) != len(y):
        raise SimilarityError(f"vector lengths differ: {len(x)} != {len(y)}")
    nx = math.sqrt(sum(a * a for a in x))
    ny = math.sqrt(sum(b * b for b in y))
    if nx == 0 or ny == 0:
        raise SimilarityError("visual vector is all zero")
    cos = sum(a * b for a, b in zip(x, y)) / (nx * ny)
    if cos > 1.0 - 1e-12:
        return 1.0
    return max(0.0, cos)


def weighted_geometric_mean(values: Sequence[float], weights: Sequence[float]) -> float:
    """prod(v_i^w_i)^(1/sum w).  Values are floored at SCORE_FLOOR first."""
    if len(values) != len(weights):
        raise SimilarityError("values and weights differ in length")
    if any(w < 0 for w in weights):
        raise SimilarityError("weights must be non-negative")
    total = sum(weights)
    if total <= 0:
        raise SimilarityError("weights must sum to a positive value")
    effective = [(max(v, SCORE_FLOOR), w) for v, w in zip(values, weights) if w > 0]
    first = effective[0][0]
    if all(v == first for v, _ in effective):
        return first  # exact idempotence, no round trip through logs
    acc = sum(w * math.log(v) for v, w in effective)
    return math.exp(acc / total)


def combined(st: float, sv: float, alpha: float = DEFAULT_ALPHA) -> float:
    """alpha-weighted geometric mean of the tabular and visual similarities."""
    if not 0 <= alpha <= 1:
        raise SimilarityError(f"alpha must be in [0,1], got {alpha}")
    return weighted_geometric_mean((st, sv), (alpha, 1.0 - alpha))


class TriState(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


def _skolemize(facts: FactSet) -> FactSet:
    """Freeze placeholder variables into distinct unmatchable constants."""

    def freeze(t: Term) -> Term:
        return Const("\x00" + t.name) if isinstance(t, Var) else t

    return FactSet(Atom(a.pred, tuple(freeze(t) for t in a.args)) for a in facts)


def evaluate_partial(p: Pattern, kb: KB, depth: int = 12) -> TriState:
    """Three-valued pattern status on a partial design.

    True when provable without instantiating any placeholder (placeholders
    act as distinct frozen constants), False when unprovable even with free
    placeholder binding, Unknown in between.
    """
    frozen = KB(kb.program, _skolemize(kb.facts))
    if holds(frozen, p.literals, depth):
        return TriState.TRUE
    if holds(kb, p.literals, depth):
        return TriState.UNKNOWN
    return TriState.FALSE


def partial_vector(patterns: PatternSet, kb: KB, depth: int = 12) -> tuple[TriState, ...]:
    return tuple(evaluate_partial(p, kb, depth) for p in patterns.patterns)


def sim_partial(partial: Sequence[TriState], candidate: Sequence[int]) -> float:
    """sim_tabular over the features whose status is known on the query."""
    bits = candidate.bits if isinstance(candidate, FeatureVector) else tuple(candidate)
    if len(partial) != len(bits):
        raise SimilarityError(f"vector lengths differ: {len(partial)} != {len(bits)}")
    known = [
        (1 if state is TriState.TRUE else 0, bit)
        for state, bit in zip(partial, bits)
        if state is not TriState.UNKNOWN
    ]
    if not known:
        raise NoInformativeFeaturesError("all patterns are Unknown on the query")
    return 1.0 - sum(abs(a - b) for a, b in known) / len(known)


@dataclass(frozen=True)
class SimilarityScore:
    sim_tabular: float
    sim_visual: float | None
    combined: float
    alpha: float


@dataclass(frozen=True)
class RankedDesign:
    design_id: str
    score: SimilarityScore


class _Indexed(Protocol):
    @property
    def id(self) -> str: ...

    @property
    def vector(self) -> FeatureVector: ...

    @property
    def visual(self) -> tuple[float, ...] | None: ...


def rank(
    tri: Sequence[TriState],
    designs: Sequence[_Indexed],
    query_visual: Sequence[float] | None,
    alpha: float = DEFAULT_ALPHA,
    k: int = 10,
) -> list[RankedDesign]:
    """Top-k designs by combined similarity against a query's TriState vector.

    Pairs missing a visual vector on either side fall back to the tabular
    term alone.  Ties break by ascending design id.
    """
    if not designs:
        raise SimilarityError("empty design index")
    if k < 1:
        raise SimilarityError("k must be >= 1")
    scored: list[RankedDesign] = []
    for design in designs:
        st = sim_partial(tri, design.vector)
        sv = None
        if query_visual is not None and design.visual is not None:
            sv = sim_visual(query_visual, design.visual)
        comb = combined(st, sv, alpha) if sv is not None else st
        scored.append(RankedDesign(design.id, SimilarityScore(st, sv, comb, alpha)))
    scored.sort(key=lambda r: (-r.score.combined, r.design_id))
    return scored[:k]
