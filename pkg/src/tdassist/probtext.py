"""Probabilistic string reasoning over OCR output.

Two tools: a max-product (Viterbi) Levenshtein score of a candidate string
against a per-position character distribution, and Bayesian revision of a
type-informed prior by the OCR distribution as virtual evidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

CharDistribution = dict[str, float]

_SUM_SLACK = 1e-9


class NoOverlapError(ValueError):
    """Prior and evidence share no support; the posterior is undefined."""


def validate_distribution(dist: Mapping[str, float]) -> CharDistribution:
    if not dist:
        raise ValueError("empty character distribution")
    for ch, p in dist.items():
        if len(ch) != 1:
            raise ValueError(f"distribution keys must be single characters, got {ch!r}")
        if not 0 < p <= 1:
            raise ValueError(f"probability for {ch!r} out of (0,1]: {p}")
    total = sum(dist.values())
    if total > 1 + _SUM_SLACK:
        raise ValueError(f"distribution mass {total} exceeds 1")
    return dict(dist)


@dataclass(frozen=True)
class ProbString:
    """One character distribution per observed position."""

    positions: tuple[CharDistribution, ...]

    def __post_init__(self):
        for i, dist in enumerate(self.positions):
            if not dist:
                raise ValueError(f"position {i} has an empty distribution")

    @property
    def length(self) -> int:
        return len(self.positions)

    @classmethod
    def from_text(cls, text: str) -> "ProbString":
        return cls(tuple({ch: 1.0} for ch in text))


@dataclass(frozen=True)
class EditPenalties:
    """Per-transition probabilities of the edit lattice (all 0.3 by default)."""

    p_insert: float = 0.3
    p_delete: float = 0.3
    p_substitute: float = 0.3

    def __post_init__(self):
        for name in ("p_insert", "p_delete", "p_substitute"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must be in (0,1), got {v}")


def prob_levenshtein(
    candidate: str, obs: ProbString, pen: EditPenalties = EditPenalties()
) -> float:
    """Probability of the best edit path aligning `candidate` with `obs`.

    Max-product Viterbi over the edit lattice.  A diagonal step reads the
    candidate character off the observed distribution when it has support
    there; otherwise it substitutes through the most likely observed
    character at the substitution penalty.  S(-1,-1) = 1 and the border
    states S(r,-1), S(-1,c) are unreachable, so every path enters the lattice
    at the corner: pure-deletion or pure-insertion prefixes score 0.
    """
    if not candidate and obs.length > 0:
        raise ValueError("candidate must be nonempty when the observation is not")
    for dist in obs.positions:
        validate_distribution(dist)
    rows, cols = len(candidate), obs.length
    # table shifted by one: cell [r+1][c+1] is S(r, c)
    score = [[0.0] * (cols + 1) for _ in range(rows + 1)]
    score[0][0] = 1.0
    for r in range(rows):
        for c in range(cols):
            best = pen.p_delete * score[r][c + 1]
            insert = pen.p_insert * score[r + 1][c]
            if insert > best:
                best = insert
            diag = score[r][c]
            if diag > 0:
                step = diagonal_step(candidate[r], obs.positions[c], pen)
                if step * diag > best:
                    best = step * diag
            score[r + 1][c + 1] = best
    return score[rows][cols]


def diagonal_step(ch: str, dist: CharDistribution, pen: EditPenalties) -> float:
    """Weight of consuming one observed position against candidate char `ch`."""
    p = dist.get(ch)
    if p is not None:
        return p
    return pen.p_substitute * max(dist.values())


def best_match(
    candidates: Sequence[str], obs: ProbString, pen: EditPenalties = EditPenalties()
) -> list[tuple[str, float]]:
    """Candidates ranked by descending score; ties resolve lexicographically."""
    if not candidates:
        raise ValueError("no candidates given")
    scored = [(word, prob_levenshtein(word, obs, pen)) for word in candidates]
    return sorted(scored, key=lambda ws: (-ws[1], ws[0]))


def virtual_evidence_posterior(
    prior: Mapping[str, float], ocr: Mapping[str, float]
) -> CharDistribution:
    """Bayes revision of `prior` by the OCR distribution as virtual evidence.

    posterior(x) is proportional to prior(x) * ocr(x) over the intersection
    of the supports.
    """
    support = [ch for ch in ocr if ch in prior]
    weights = {ch: prior[ch] * ocr[ch] for ch in support}
    total = sum(weights.values())
    if total <= 0:
        raise NoOverlapError("prior and OCR evidence have disjoint supports")
    return {ch: w / total for ch, w in weights.items()}


def type_prior(
    ocr_support: Iterable[str], char_class: Callable[[str], bool], ratio: float = 8.0
) -> CharDistribution:
    """Prior over the observed characters, upweighting a character class.

    Class-compatible characters get weight `ratio`, all others 1, normalized
    over the OCR support only.
    """
    support = list(dict.fromkeys(ocr_support))
    if not support:
        raise ValueError("empty OCR support")
    if ratio < 1:
        raise ValueError(f"ratio must be >= 1, got {ratio}")
    weights = {ch: (ratio if char_class(ch) else 1.0) for ch in support}
    total = sum(weights.values())
    return {ch: w / total for ch, w in weights.items()}


CHAR_CLASSES: dict[str, Callable[[str], bool]] = {
    "digit": lambda ch: ch.isdigit(),
    "upper_alpha": lambda ch: ch.isalpha() and ch.isupper(),
    "alnum": lambda ch: ch.isalnum(),
}
