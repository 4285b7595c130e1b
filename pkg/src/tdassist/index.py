"""The design database: extracted facts, pattern vectors, visual vectors and
learned parser programs, persisted as one self-describing file."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .drawing import Drawing, load_drawing
from .ilp import BASE_RULES
from .logic import (
    FactSet,
    Program,
    format_atom,
    format_program,
    parse_conjunction,
    parse_program,
)
from .mining import (
    FeatureVector,
    MiningBias,
    PatternSet,
    default_bias,
    mine,
    vectorize,
)
from .pipeline import extract_facts, program_targets, query_kb
from .similarity import RankedDesign, TriState, partial_vector, rank

FORMAT_VERSION = 1


class DesignIndexError(ValueError):
    pass


class ConflictError(DesignIndexError):
    """Same design id arriving with different document content."""


class IntegrityError(DesignIndexError):
    """Corrupt or truncated index file."""


class MigrationError(DesignIndexError):
    """Index file written by an incompatible format version."""


def document_digest(document: bytes | str | dict | Drawing) -> str:
    """Digest of the drawing content, invariant to JSON formatting details."""
    from .drawing import serialize_drawing

    drawing = document if isinstance(document, Drawing) else load_drawing(document)
    payload = json.dumps(serialize_drawing(drawing), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class IndexedDesign:
    id: str
    facts: FactSet
    vector: FeatureVector
    visual: tuple[float, ...] | None
    digest: str


@dataclass(frozen=True)
class DesignIndex:
    patterns: PatternSet
    designs: dict[str, IndexedDesign] = field(default_factory=dict)
    programs: dict[str, Program] = field(default_factory=dict)
    depth: int = 12
    version: int = FORMAT_VERSION


def _design_from_drawing(index: DesignIndex, drawing: Drawing, digest: str) -> IndexedDesign:
    if any(c.is_placeholder for c in drawing.cells):
        raise DesignIndexError(f"design {drawing.id!r} has empty cells; index full designs only")
    if drawing.visual_features is not None and not any(drawing.visual_features):
        raise DesignIndexError(f"design {drawing.id!r} has an all-zero visual vector")
    facts = extract_facts(drawing, index.programs, depth=index.depth)
    vector = vectorize(facts, index.patterns, index.depth, design_id=drawing.id)
    return IndexedDesign(drawing.id, facts, vector, drawing.visual_features, digest)


def add_design(index: DesignIndex, document: bytes | str | dict) -> DesignIndex:
    """Extract, vectorize and store one design; idempotent per (id, digest)."""
    drawing = load_drawing(document)
    digest = document_digest(drawing)
    existing = index.designs.get(drawing.id)
    if existing is not None:
        if existing.digest == digest:
            return index
        raise ConflictError(f"design {drawing.id!r} already indexed with different content")
    designs = dict(index.designs)
    designs[drawing.id] = _design_from_drawing(index, drawing, digest)
    return DesignIndex(index.patterns, designs, index.programs, index.depth, index.version)


def build_index(
    documents: Sequence[bytes | str | dict],
    programs: Mapping[str, Program] | None = None,
    min_support_frac: float = 0.10,
    max_literals: int = 6,
    bias: MiningBias | None = None,
    depth: int = 12,
) -> DesignIndex:
    """Mine the pattern vocabulary on the corpus, then vectorize every design.

    The PatternSet is frozen here; later add_design calls reuse it so vectors
    stay comparable.  Re-mining is an explicit rebuild.
    """
    programs = dict(programs or {})
    drawings = [load_drawing(doc) for doc in documents]
    digests = [document_digest(d) for d in drawings]
    extracted = [extract_facts(d, programs, depth=depth) for d in drawings]
    if bias is None:
        bias = default_bias(program_targets(programs))
    patterns = mine(extracted, min_support_frac, max_literals, bias, depth)
    index = DesignIndex(patterns, {}, programs, depth)
    for drawing, digest, facts in zip(drawings, digests, extracted):
        if drawing.id in index.designs:
            raise ConflictError(f"duplicate design id {drawing.id!r} in corpus")
        vector = vectorize(facts, patterns, depth, design_id=drawing.id)
        if drawing.visual_features is not None and not any(drawing.visual_features):
            raise DesignIndexError(f"design {drawing.id!r} has an all-zero visual vector")
        index.designs[drawing.id] = IndexedDesign(
            drawing.id, facts, vector, drawing.visual_features, digest
        )
    return index


# ---------------------------------------------------------------------------
# Query path shared by CLI and HTTP service


def query_index(
    index: DesignIndex,
    document: bytes | str | dict,
    alpha: float = 0.5,
    k: int = 10,
    require_full: bool = False,
) -> tuple[list[RankedDesign], tuple[TriState, ...]]:
    drawing = load_drawing(document)
    if require_full and any(c.is_placeholder for c in drawing.cells):
        raise DesignIndexError("query document has empty cells; use the partial query")
    kb = query_kb(drawing, index.programs, BASE_RULES)
    tri = partial_vector(index.patterns, kb, index.depth)
    ranked = rank(tri, list(index.designs.values()), drawing.visual_features, alpha, k)
    return ranked, tri


def ranking_payload(ranked: Sequence[RankedDesign]) -> list[dict[str, Any]]:
    return [
        {
            "id": r.design_id,
            "sim_tabular": r.score.sim_tabular,
            "sim_visual": r.score.sim_visual,
            "combined": r.score.combined,
            "rank": i + 1,
        }
        for i, r in enumerate(ranked)
    ]


def provenance_payload(
    patterns: PatternSet, tri: Sequence[TriState]
) -> list[dict[str, str]]:
    return [
        {"pattern": p.key, "status": state.value}
        for p, state in zip(patterns.patterns, tri)
    ]


# ---------------------------------------------------------------------------
# Persistence


def _payload(index: DesignIndex) -> dict:
    return {
        "depth": index.depth,
        "patterns": index.patterns.to_text(),
        "programs": {label: format_program(p) for label, p in index.programs.items()},
        "designs": [
            {
                "id": d.id,
                "digest": d.digest,
                "facts": [format_atom(a) for a in d.facts],
                "bits": "".join(str(b) for b in d.vector.bits),
                "visual": list(d.visual) if d.visual is not None else None,
            }
            for d in index.designs.values()
        ],
    }


def persist(index: DesignIndex, path: str | Path) -> None:
    payload = _payload(index)
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    envelope = {
        "version": index.version,
        "digest": hashlib.sha256(body.encode("utf-8")).hexdigest(),
        "payload": payload,
    }
    Path(path).write_text(json.dumps(envelope, indent=1))


def load(path: str | Path) -> DesignIndex:
    try:
        envelope = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise IntegrityError(f"unreadable index file {path}: {e}") from e
    if not isinstance(envelope, dict) or "payload" not in envelope:
        raise IntegrityError(f"index file {path} has no payload")
    version = envelope.get("version")
    if version != FORMAT_VERSION:
        raise MigrationError(f"index version {version} unsupported (expected {FORMAT_VERSION})")
    payload = envelope["payload"]
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != envelope.get("digest"):
        raise IntegrityError(f"index file {path} failed its content digest")
    try:
        patterns = PatternSet.from_text(payload["patterns"])
        programs = {
            label: parse_program(text) for label, text in payload["programs"].items()
        }
        designs: dict[str, IndexedDesign] = {}
        for entry in payload["designs"]:
            facts = FactSet(
                parse_conjunction(text)[0] for text in entry["facts"]
            )
            bits = tuple(int(ch) for ch in entry["bits"])
            visual = tuple(entry["visual"]) if entry["visual"] is not None else None
            designs[entry["id"]] = IndexedDesign(
                entry["id"],
                facts,
                FeatureVector(entry["id"], bits),
                visual,
                entry["digest"],
            )
        return DesignIndex(patterns, designs, programs, payload["depth"])
    except (KeyError, ValueError, TypeError) as e:
        raise IntegrityError(f"index file {path} is malformed: {e}") from e
