"""Probabilistic Levenshtein scoring and virtual-evidence OCR correction."""

import random

import pytest

from tdassist.probtext import (
    CHAR_CLASSES,
    EditPenalties,
    NoOverlapError,
    ProbString,
    best_match,
    prob_levenshtein,
    type_prior,
    virtual_evidence_posterior,
)

# The running example: a five-character observation whose best reading is
# "dries" (0.8 at position 0 and 3, certain elsewhere).
OBS = ProbString(
    (
        {"d": 0.8, "b": 0.1, "o": 0.1},
        {"r": 1.0},
        {"i": 1.0},
        {"e": 0.8, "3": 0.2},
        {"s": 1.0},
    )
)

# OCR reading of a quantity cell that actually holds a '1'.
OCR_DIST = {"]": 0.630, "1": 0.130, "|": 0.071, "I": 0.071, "J": 0.054, "l": 0.043}


def path_oracle(candidate, obs, pen=EditPenalties()):
    """Exhaustive enumeration of every edit path; max product at the leaves.

    Moves are legal only from states with both indexes above -1, so paths
    stranded on a border contribute nothing.
    """
    best = 0.0

    def diag(ch, dist):
        return dist[ch] if ch in dist else pen.p_substitute * max(dist.values())

    def walk(r, c, acc):
        nonlocal best
        if r == -1 and c == -1:
            best = max(best, acc)
            return
        if r == -1 or c == -1:
            return
        walk(r - 1, c, acc * pen.p_delete)
        walk(r, c - 1, acc * pen.p_insert)
        walk(r - 1, c - 1, acc * diag(candidate[r], obs.positions[c]))

    walk(len(candidate) - 1, obs.length - 1, 1.0)
    return best


class TestProbLevenshtein:
    def test_golden_dries(self):
        assert prob_levenshtein("dries", OBS) == pytest.approx(0.64, abs=1e-9)

    def test_golden_dii3s(self):
        assert prob_levenshtein("dii3s", OBS) == pytest.approx(0.048, abs=1e-9)

    def test_golden_ordering(self):
        dries = prob_levenshtein("dries", OBS)
        dii3s = prob_levenshtein("dii3s", OBS)
        wannes = prob_levenshtein("wannes", OBS)
        assert dries > dii3s > wannes

    def test_exact_match_scores_one(self):
        obs = ProbString.from_text("seal")
        assert prob_levenshtein("seal", obs) == 1.0

    def test_empty_candidate_rejected(self):
        with pytest.raises(ValueError):
            prob_levenshtein("", OBS)

    def test_empty_observation(self):
        empty = ProbString(())
        assert prob_levenshtein("", empty) == 1.0
        assert prob_levenshtein("a", empty) == 0.0

    def test_empty_position_distribution_rejected(self):
        with pytest.raises(ValueError):
            ProbString(({},))

    def test_matches_path_oracle(self):
        rng = random.Random(21)
        alphabet = "abcd"
        for trial in range(150):
            cand = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
            positions = []
            for _ in range(rng.randint(1, 6)):
                chars = rng.sample(alphabet, rng.randint(1, 3))
                weights = [rng.random() + 0.05 for _ in chars]
                total = sum(weights) / rng.uniform(0.8, 1.0)
                positions.append({c: w / total for c, w in zip(chars, weights)})
            obs = ProbString(tuple(positions))
            pen = EditPenalties(
                p_insert=rng.uniform(0.1, 0.9),
                p_delete=rng.uniform(0.1, 0.9),
                p_substitute=rng.uniform(0.1, 0.9),
            ) if trial % 3 == 0 else EditPenalties()
            assert prob_levenshtein(cand, obs, pen) == pytest.approx(
                path_oracle(cand, obs, pen), abs=1e-12
            )

    def test_appending_never_raises_score(self):
        rng = random.Random(4)
        for _ in range(50):
            cand = "".join(rng.choice("abc") for _ in range(rng.randint(1, 5)))
            base = prob_levenshtein(cand, OBS)
            assert prob_levenshtein(cand + rng.choice("abcz"), OBS) <= base + 1e-15


class TestBestMatch:
    def test_listing_candidates(self):
        ranked = best_match(["wannes", "dii3s", "dries"], OBS)
        assert ranked[0][0] == "dries"

    def test_single_candidate(self):
        assert best_match(["only"], OBS)[0][0] == "only"

    def test_tie_breaks_lexicographically(self):
        obs = ProbString.from_text("xy")
        ranked = best_match(["ba", "ab"], obs)
        assert [w for w, _ in ranked] == ["ab", "ba"]

    def test_empty_candidates(self):
        with pytest.raises(ValueError):
            best_match([], OBS)


class TestTypePrior:
    def test_fig4_ratio_8(self):
        prior = type_prior(OCR_DIST.keys(), CHAR_CLASSES["digit"], ratio=8)
        assert prior["1"] == pytest.approx(8 / 13, abs=1e-9)
        for ch in "]|IJl":
            assert prior[ch] == pytest.approx(1 / 13, abs=1e-9)

    def test_all_compatible_is_uniform(self):
        prior = type_prior("123", CHAR_CLASSES["digit"], ratio=8)
        assert all(p == pytest.approx(1 / 3) for p in prior.values())

    def test_ratio_one_is_uniform(self):
        prior = type_prior(OCR_DIST.keys(), CHAR_CLASSES["digit"], ratio=1)
        assert all(p == pytest.approx(1 / 6) for p in prior.values())

    def test_bad_ratio(self):
        with pytest.raises(ValueError):
            type_prior("ab", CHAR_CLASSES["digit"], ratio=0.5)


class TestPosterior:
    def test_fig4_golden(self):
        prior = type_prior(OCR_DIST.keys(), CHAR_CLASSES["digit"], ratio=8)
        posterior = virtual_evidence_posterior(prior, OCR_DIST)
        expected = {"1": 0.544, "]": 0.330, "|": 0.037, "I": 0.037, "J": 0.028, "l": 0.023}
        for ch, val in expected.items():
            assert posterior[ch] == pytest.approx(val, abs=0.005)
        assert max(posterior, key=posterior.get) == "1"

    def test_uniform_prior_renormalizes_evidence(self):
        prior = {ch: 1 / 6 for ch in OCR_DIST}
        posterior = virtual_evidence_posterior(prior, OCR_DIST)
        total = sum(OCR_DIST.values())
        for ch in OCR_DIST:
            assert posterior[ch] == pytest.approx(OCR_DIST[ch] / total, abs=1e-9)

    def test_point_mass_prior(self):
        posterior = virtual_evidence_posterior({"1": 1.0}, OCR_DIST)
        assert posterior == {"1": 1.0}

    def test_disjoint_supports(self):
        with pytest.raises(NoOverlapError):
            virtual_evidence_posterior({"x": 1.0}, OCR_DIST)

    def test_sums_to_one(self):
        rng = random.Random(8)
        chars = "abcdef"
        for _ in range(100):
            prior = {c: rng.random() + 0.01 for c in rng.sample(chars, rng.randint(2, 6))}
            ocr = {c: rng.random() + 0.01 for c in rng.sample(chars, rng.randint(2, 6))}
            z = sum(prior.values())
            prior = {c: v / z for c, v in prior.items()}
            z = sum(ocr.values())
            ocr = {c: v / z for c, v in ocr.items()}
            if set(prior) & set(ocr):
                posterior = virtual_evidence_posterior(prior, ocr)
                assert sum(posterior.values()) == pytest.approx(1.0, abs=1e-9)
                best = max(posterior, key=posterior.get)
                products = {c: prior[c] * ocr[c] for c in posterior}
                assert products[best] == max(products.values())
