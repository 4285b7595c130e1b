"""Drawings, cells, annotations, and the relational facts derived from them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from .logic import Atom, Const, FactSet, Var
from .probtext import ProbString, validate_distribution

DEFAULT_GAP_TOL = 5.0
DEFAULT_OVERLAP_FRAC = 0.5


class DocumentError(ValueError):
    """Malformed drawing document; `path` names the offending element."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True, slots=True)
class BoundingBox:
    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bbox requires positive size, got {self.width}x{self.height}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"bbox origin must be non-negative, got ({self.x},{self.y})")

    @property
    def right(self) -> float:
        return self.x + self.width

    @property
    def bottom(self) -> float:
        return self.y + self.height


@dataclass(frozen=True)
class Cell:
    """One table cell.  `text` is None for the open placeholder of a partial design."""

    id: str
    bbox: BoundingBox
    text: str | None = None
    ocr: ProbString | None = None

    @property
    def is_placeholder(self) -> bool:
        return self.text is None

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self.text.split()) if self.text is not None else ()


Annotation = tuple[str, int | None]  # (cell id, optional row index)


@dataclass(frozen=True)
class Drawing:
    id: str
    cells: tuple[Cell, ...]
    labels: dict[str, tuple[Annotation, ...]] = field(default_factory=dict)
    visual_features: tuple[float, ...] | None = None

    def __post_init__(self):
        ids = [c.id for c in self.cells]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})[0]
            raise DocumentError(f"cells[{ids.index(dup)}].id", f"duplicate cell id {dup!r}")
        known = set(ids)
        for label, annotations in self.labels.items():
            for cell_id, index in annotations:
                if cell_id not in known:
                    raise DocumentError(f"labels[{label}]", f"unknown cell {cell_id!r}")
                if index is not None and (not isinstance(index, int) or index < 0):
                    raise DocumentError(f"labels[{label}]", f"bad index {index!r}")

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(cell_id)

    def with_prefixed_ids(self, prefix: str) -> "Drawing":
        """Namespace cell ids, so drawings can share one fact set."""
        cells = tuple(replace(c, id=prefix + c.id) for c in self.cells)
        labels = {
            label: tuple((prefix + cid, idx) for cid, idx in anns)
            for label, anns in self.labels.items()
        }
        return Drawing(self.id, cells, labels, self.visual_features)


# ---------------------------------------------------------------------------
# Drawing-document JSON format


def load_drawing(document: bytes | str | dict) -> Drawing:
    if isinstance(document, (bytes, str)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as e:
            raise DocumentError("$", f"invalid JSON: {e}") from e
    else:
        data = document
    if not isinstance(data, dict):
        raise DocumentError("$", "document must be a JSON object")
    drawing_id = data.get("id")
    if not isinstance(drawing_id, str) or not drawing_id:
        raise DocumentError("id", "missing or empty drawing id")
    raw_cells = data.get("cells")
    if not isinstance(raw_cells, list):
        raise DocumentError("cells", "expected a list")
    cells = tuple(_load_cell(c, f"cells[{i}]") for i, c in enumerate(raw_cells))

    labels: dict[str, tuple[Annotation, ...]] = {}
    raw_labels = data.get("labels") or {}
    if not isinstance(raw_labels, dict):
        raise DocumentError("labels", "expected an object")
    for label, entries in raw_labels.items():
        if not isinstance(entries, list):
            raise DocumentError(f"labels[{label}]", "expected a list")
        anns = []
        for j, entry in enumerate(entries):
            if not isinstance(entry, dict) or "cell" not in entry:
                raise DocumentError(f"labels[{label}][{j}]", "expected {cell, index}")
            index = entry.get("index")
            if index is not None and not isinstance(index, int):
                raise DocumentError(f"labels[{label}][{j}].index", "expected int or null")
            anns.append((entry["cell"], index))
        labels[label] = tuple(anns)

    visual = data.get("visual_features")
    features: tuple[float, ...] | None = None
    if visual is not None:
        if not isinstance(visual, list) or len(visual) != 64:
            raise DocumentError("visual_features", "expected 64 floats")
        features = tuple(float(v) for v in visual)
        if not all(math.isfinite(v) for v in features):
            raise DocumentError("visual_features", "entries must be finite")

    return Drawing(drawing_id, cells, labels, features)


def _load_cell(raw: Any, path: str) -> Cell:
    if not isinstance(raw, dict):
        raise DocumentError(path, "expected an object")
    cell_id = raw.get("id")
    if not isinstance(cell_id, str) or not cell_id:
        raise DocumentError(f"{path}.id", "missing or empty cell id")
    bbox = raw.get("bbox")
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise DocumentError(f"{path}.bbox", "expected [x,y,w,h]")
    try:
        box = BoundingBox(*(float(v) for v in bbox))
    except (TypeError, ValueError) as e:
        raise DocumentError(f"{path}.bbox", str(e)) from e
    text = raw.get("text")
    if text is not None and not isinstance(text, str):
        raise DocumentError(f"{path}.text", "expected string or null")
    ocr = None
    if raw.get("ocr") is not None:
        ocr = _load_ocr(raw["ocr"], f"{path}.ocr")
    return Cell(cell_id, box, text, ocr)


def _load_ocr(raw: Any, path: str) -> ProbString:
    if not isinstance(raw, dict) or "positions" not in raw or "length" not in raw:
        raise DocumentError(path, "expected {length, positions}")
    positions = raw["positions"]
    length = raw["length"]
    if not isinstance(positions, list) or not isinstance(length, int):
        raise DocumentError(path, "expected {length: int, positions: list}")
    if len(positions) != length:
        raise DocumentError(f"{path}.length", f"length {length} != {len(positions)} positions")
    dists = []
    for i, dist in enumerate(positions):
        if not isinstance(dist, dict):
            raise DocumentError(f"{path}.positions[{i}]", "expected {char: probability}")
        try:
            dists.append(validate_distribution({str(k): float(v) for k, v in dist.items()}))
        except ValueError as e:
            raise DocumentError(f"{path}.positions[{i}]", str(e)) from e
    return ProbString(tuple(dists))


def serialize_drawing(drawing: Drawing) -> dict:
    """Inverse of load_drawing; load(serialize(d)) == d."""
    cells = []
    for c in drawing.cells:
        entry: dict[str, Any] = {
            "id": c.id,
            "bbox": [c.bbox.x, c.bbox.y, c.bbox.width, c.bbox.height],
            "text": c.text,
        }
        if c.ocr is not None:
            entry["ocr"] = {
                "length": c.ocr.length,
                "positions": [dict(p) for p in c.ocr.positions],
            }
        cells.append(entry)
    return {
        "id": drawing.id,
        "cells": cells,
        "labels": {
            label: [{"cell": cid, "index": idx} for cid, idx in anns]
            for label, anns in drawing.labels.items()
        },
        "visual_features": list(drawing.visual_features) if drawing.visual_features else None,
    }


# ---------------------------------------------------------------------------
# Relational background facts


def _overlap(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    return min(hi1, hi2) - max(lo1, lo2)


def derive_adjacency(
    drawing: Drawing,
    gap_tol: float = DEFAULT_GAP_TOL,
    overlap_frac: float = DEFAULT_OVERLAP_FRAC,
) -> FactSet:
    """Directed nearest-neighbour adjacency facts.

    above_below(A, B) holds when A is the nearest cell directly above B: the
    vertical gap is within gap_tol and the horizontal overlap covers at least
    overlap_frac of the narrower cell.  Ties at the minimal gap all count,
    which covers several narrow cells sitting on one wide cell.  left_right
    is the same construction along the x axis.
    """
    atoms: list[Atom] = []
    for below in drawing.cells:
        best: list[str] = []
        best_gap = None
        for above in drawing.cells:
            if above.id == below.id:
                continue
            gap = below.bbox.y - above.bbox.bottom
            if gap < 0 or gap > gap_tol:
                continue
            span = _overlap(above.bbox.x, above.bbox.right, below.bbox.x, below.bbox.right)
            if span < overlap_frac * min(above.bbox.width, below.bbox.width):
                continue
            if best_gap is None or gap < best_gap:
                best_gap, best = gap, [above.id]
            elif gap == best_gap:
                best.append(above.id)
        for above_id in best:
            atoms.append(Atom("above_below", (Const(above_id), Const(below.id))))
    for right in drawing.cells:
        best = []
        best_gap = None
        for left in drawing.cells:
            if left.id == right.id:
                continue
            gap = right.bbox.x - left.bbox.right
            if gap < 0 or gap > gap_tol:
                continue
            span = _overlap(left.bbox.y, left.bbox.bottom, right.bbox.y, right.bbox.bottom)
            if span < overlap_frac * min(left.bbox.height, right.bbox.height):
                continue
            if best_gap is None or gap < best_gap:
                best_gap, best = gap, [left.id]
            elif gap == best_gap:
                best.append(left.id)
        for left_id in best:
            atoms.append(Atom("left_right", (Const(left_id), Const(right.id))))
    return FactSet(atoms)


def derive_succ(max_index: int) -> FactSet:
    if max_index < 0:
        raise ValueError("max_index must be >= 0")
    return FactSet(
        Atom("succ", (Const(i), Const(i + 1))) for i in range(max_index)
    )


def _num(value: float) -> int | float:
    return int(value) if float(value).is_integer() else value


def drawing_to_facts(drawing: Drawing) -> FactSet:
    """cell/1, cell_contains/2 and bbox/5 facts for one drawing.

    Placeholder cells contribute cell_contains(C, V) with a fresh variable,
    the open token slot of a partial design.
    """
    atoms: list[Atom] = []
    placeholder = 0
    for c in drawing.cells:
        cid = Const(c.id)
        atoms.append(Atom("cell", (cid,)))
        if c.is_placeholder:
            atoms.append(Atom("cell_contains", (cid, Var(f"_P{placeholder}"))))
            placeholder += 1
        else:
            for tok in c.tokens:
                atoms.append(Atom("cell_contains", (cid, Const(tok))))
        atoms.append(
            Atom(
                "bbox",
                (
                    cid,
                    Const(_num(c.bbox.x)),
                    Const(_num(c.bbox.y)),
                    Const(_num(c.bbox.width)),
                    Const(_num(c.bbox.height)),
                ),
            )
        )
    return FactSet(atoms)


def background_facts(
    drawing: Drawing,
    gap_tol: float = DEFAULT_GAP_TOL,
    overlap_frac: float = DEFAULT_OVERLAP_FRAC,
    succ_limit: int | None = None,
) -> FactSet:
    """Full extensional background of one drawing: content, adjacency, succ.

    succ covers indexes up to the cell count by default, enough for any
    table the drawing could contain.
    """
    if succ_limit is None:
        succ_limit = len(drawing.cells)
    return (
        drawing_to_facts(drawing)
        | derive_adjacency(drawing, gap_tol, overlap_frac)
        | derive_succ(succ_limit)
    )


def placeholder_vars(facts: Iterable[Atom]) -> tuple[Var, ...]:
    seen: dict[Var, None] = {}
    for atom in facts:
        for arg in atom.args:
            if isinstance(arg, Var):
                seen.setdefault(arg)
    return tuple(seen)
