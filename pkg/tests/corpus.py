"""Synthetic drawing corpus: parts-list tables with header and title bar,
an author/approver block, and free-floating note cells.

Layout (y grows downward): the title bar sits at the bottom of the table,
the header row directly above it, and materials rows stack upward, row 0
just above the header.  All vertical and horizontal gaps are 2 px.
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

CELL_H = 20.0
GAP = 2.0
ROW_PITCH = CELL_H + GAP

QTY_X, QTY_W = 400.0, 60.0
DESC_X, DESC_W = 462.0, 140.0
TITLE_Y = 500.0

TITLES = ["PARTS LIST", "ITEM LIST"]
QTY_HEADERS = ["QTY", "QTE", "CNT", "NO"]
DESC_HEADERS = ["DESCRIPTION", "PART NAME", "DESC", "COMPONENT"]
# Quantity of row i in drawing j is QUANTITIES[(i + j) % 3]: every value that
# shows up in a row 0 also shows up in some later row, so no single token can
# anchor the table start.
QUANTITIES = ["1", "2", "4"]
DESCRIPTIONS = [
    "Spring",
    "Jacket",
    "Spacer",
    "O-Ring",
    "Gasket",
    "Washer",
    "Retainer",
    "Housing",
    "Double Seal",
    "NICKEL ALLOY",
    "COBALT Spring",
    "Back-up Ring",
]
NAMES = [
    "A. JANSSEN",
    "M. PETERS",
    "K. DE VOS",
    "L. MAES",
    "R. CLAES",
    "S. WOUTERS",
]


def _cell(cid: str, x: float, y: float, w: float, text: str | None) -> dict:
    return {"id": cid, "bbox": [x, y, w, CELL_H], "text": text}


def generate_drawing(
    drawing_id: str, rows: int, rng: random.Random, drawing_no: int = 0
) -> dict:
    """One drawing document with a `rows`-row materials table."""
    title = rng.choice(TITLES)
    qty_header = rng.choice(QTY_HEADERS)
    desc_header = rng.choice(DESC_HEADERS)
    cells = [
        _cell("note0", 50.0, 80.0, 150.0, rng.choice(DESCRIPTIONS)),
        _cell("note1", 50.0, 140.0, 150.0, rng.choice(DESCRIPTIONS)),
        _cell("appr", 50.0, TITLE_Y - ROW_PITCH, 60.0, "APPR"),
        _cell("apprby", 112.0, TITLE_Y - ROW_PITCH, 110.0, rng.choice(NAMES)),
        _cell("drawn", 50.0, TITLE_Y, 60.0, "DRAWN"),
        _cell("author", 112.0, TITLE_Y, 110.0, rng.choice(NAMES)),
    ]
    materials = []
    for i in range(rows):
        y = TITLE_Y - ROW_PITCH * (i + 2)
        qty = QUANTITIES[(i + drawing_no) % len(QUANTITIES)]
        cells.append(_cell(f"qty{i}", QTY_X, y, QTY_W, qty))
        cells.append(_cell(f"desc{i}", DESC_X, y, DESC_W, rng.choice(DESCRIPTIONS)))
        materials.append({"cell": f"qty{i}", "index": i})
        materials.append({"cell": f"desc{i}", "index": i})
    cells.append(_cell("hqty", QTY_X, TITLE_Y - ROW_PITCH, QTY_W, qty_header))
    cells.append(_cell("hdesc", DESC_X, TITLE_Y - ROW_PITCH, DESC_W, desc_header))
    cells.append(_cell("title", QTY_X, TITLE_Y, QTY_W + GAP + DESC_W, title))
    return {
        "id": drawing_id,
        "cells": cells,
        "labels": {
            "author": [{"cell": "author", "index": None}],
            "approver": [{"cell": "apprby", "index": None}],
            "header": [
                {"cell": "hqty", "index": None},
                {"cell": "hdesc", "index": None},
            ],
            "materials": materials,
        },
        "visual_features": [round(rng.uniform(0.05, 1.0), 6) for _ in range(64)],
    }


def generate_corpus(
    count: int = 12,
    row_counts: list[int] | None = None,
    seed: int = 7,
) -> list[dict]:
    rng = random.Random(seed)
    if row_counts is None:
        row_counts = [1, 2, 3, 4, 5, 6]
    return [
        generate_drawing(f"d{i:02d}", row_counts[i % len(row_counts)], rng, drawing_no=i)
        for i in range(count)
    ]


BIAS_TEXT = """\
head author(+cell)
head approver(+cell)
head header(+cell)
head materials(+index, +cell)
body zero(+index)
body succ(-index, +index)
body above_below(+cell, -cell)
body above_below(-cell, +cell)
body left_right(+cell, -cell)
body left_right(-cell, +cell)
body cell_contains(+cell, #token)
"""


def write_corpus(directory: Path, documents: list[dict]) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for doc in documents:
        (directory / f"{doc['id']}.json").write_text(json.dumps(doc, indent=1))
    (directory / "bias.txt").write_text(BIAS_TEXT)


def main() -> None:
    parser = argparse.ArgumentParser(description="generate a fixture corpus")
    parser.add_argument("out", type=Path)
    parser.add_argument("--count", type=int, default=12)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    write_corpus(args.out, generate_corpus(args.count, seed=args.seed))
    print(f"wrote {args.count} drawings to {args.out}")


if __name__ == "__main__":
    main()
