"""Command-line front door: batch pipeline runs and service launch.

Every subcommand is a thin wrapper over the library; output is JSON on
stdout (pretty-printed behind --pretty).  Exit codes: 0 success, 1 input or
validation problem, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import bootstrap as bs
from . import index as index_mod
from . import service
from .drawing import load_drawing
from .ilp import SearchParams, parse_bias
from .logic import Clause, Program, format_clause, format_program, parse_program
from .mining import default_bias, mine
from .pipeline import (
    build_tasks,
    extract_facts,
    learn_bootstrap,
    learn_standard,
    merged_rules,
    predict,
    program_targets,
)
from .probtext import EditPenalties, best_match
from .segmentation import load_bitmap, segment_bitmap

CONFIG_ENV = "TDASSIST_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems are validation errors: exit 1
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    return data


def _setting(args: argparse.Namespace, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _search_params(args: argparse.Namespace, config: dict) -> SearchParams:
    return SearchParams(
        proof_depth=int(_setting(args, config, "depth", 12)),
        max_clause_len=int(_setting(args, config, "max_clause_len", 5)),
        node_bound=int(_setting(args, config, "node_bound", 60000)),
        noise=int(_setting(args, config, "noise", 0)),
    )


def _penalties(config: dict) -> EditPenalties:
    raw = config.get("penalties", {})
    return EditPenalties(
        p_insert=float(raw.get("insert", 0.3)),
        p_delete=float(raw.get("delete", 0.3)),
        p_substitute=float(raw.get("substitute", 0.3)),
    )


def _read_documents(directory: Path) -> list[dict]:
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise ValueError(f"no *.json drawing documents in {directory}")
    return [json.loads(p.read_text()) for p in paths]


def _programs_from_file(path: str | None) -> dict[str, Program]:
    if path is None:
        return {}
    text = Path(path).read_text()
    grouped: dict[str, list[Clause]] = {}
    for clause in parse_program(text):
        grouped.setdefault(clause.head.pred, []).append(clause)
    return {label: tuple(clauses) for label, clauses in grouped.items()}


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_segment(args, config) -> Any:
    bmp = load_bitmap(args.image)
    segments, _, _ = segment_bitmap(
        bmp,
        eps=float(_setting(args, config, "eps", 30.0)),
        threshold=int(_setting(args, config, "threshold", 200)),
        min_pts=args.min_pts,
    )
    return {
        "clusters": [
            {
                "bbox": [s.bbox.x, s.bbox.y, s.bbox.width, s.bbox.height],
                "pixels": s.pixel_count,
            }
            for s in segments
        ]
    }


def _cmd_learn(args, config) -> Any:
    documents = _read_documents(Path(args.labeled_dir))
    drawings = [load_drawing(d) for d in documents]
    bias_path = _setting(args, config, "bias", None)
    if bias_path is None:
        raise ValueError("learn needs a bias file (--bias or config)")
    modes = parse_bias(Path(bias_path).read_text())
    params = _search_params(args, config)
    tasks = build_tasks(drawings, modes, params, seed=args.seed)

    if args.bootstrap:
        graph = None
        if args.deps:
            graph = bs.parse_dependency_file(Path(args.deps).read_text())
        run = learn_bootstrap(tasks, graph)
        results = run.results
        extra = {
            "mode": "bootstrap",
            "ranking": [
                {"label": e.label, "train_f1": e.f1, "size_literals": e.size}
                for e in run.ranking.entries
            ],
            "order": list(bs.learning_order(run.graph, extra_labels=tuple(tasks))),
        }
    else:
        results = learn_standard(tasks)
        extra = {"mode": "standard"}

    payload = dict(extra)
    payload["labels"] = {
        label: {
            "program": [format_clause(c) for c in res.program],
            "train_f1": res.f1,
            "precision": res.precision,
            "recall": res.recall,
            "size_literals": res.size_literals,
        }
        for label, res in results.items()
    }
    if args.out:
        text = "".join(format_program(res.program) for res in results.values() if res.program)
        Path(args.out).write_text(text)
    return payload


def _cmd_parse(args, config) -> Any:
    document = json.loads(Path(args.document).read_text())
    drawing = load_drawing(document)
    programs = _programs_from_file(args.programs)
    depth = int(_setting(args, config, "depth", 12))
    rules = merged_rules(programs)
    derived: dict[str, list] = {}
    for label, arity in program_targets(programs).items():
        atoms = predict((), drawing, (label, arity), rules, depth)
        if arity == 2:
            derived[label] = [
                {"index": a.args[0].value, "cell": a.args[1].value} for a in atoms
            ]
        else:
            derived[label] = [{"cell": a.args[0].value} for a in atoms]
    facts = extract_facts(drawing, programs, depth=depth)
    return {"facts": [str(a) for a in facts], "labels": derived}


def _cmd_mine(args, config) -> Any:
    documents = _read_documents(Path(args.corpus_dir))
    drawings = [load_drawing(d) for d in documents]
    programs = _programs_from_file(args.programs)
    depth = int(_setting(args, config, "depth", 12))
    extracted = [extract_facts(d, programs, depth=depth) for d in drawings]
    patterns = mine(
        extracted,
        min_support_frac=float(_setting(args, config, "min_support", 0.10)),
        max_literals=int(_setting(args, config, "max_literals", 6)),
        bias=default_bias(program_targets(programs)),
        depth=depth,
    )
    if args.out:
        Path(args.out).write_text(patterns.to_text())
    return {
        "patterns": [
            {"pattern": p.key, "support": s}
            for p, s in zip(patterns.patterns, patterns.supports)
        ]
    }


def _cmd_index_build(args, config) -> Any:
    documents = _read_documents(Path(args.corpus_dir))
    programs = _programs_from_file(args.programs)
    built = index_mod.build_index(
        documents,
        programs,
        min_support_frac=float(_setting(args, config, "min_support", 0.10)),
        max_literals=int(_setting(args, config, "max_literals", 6)),
        depth=int(_setting(args, config, "depth", 12)),
    )
    out = _setting(args, config, "index", None)
    if out is None:
        raise ValueError("index build needs an output path (--out or config)")
    index_mod.persist(built, out)
    return {"out": str(out), "designs": len(built.designs), "patterns": len(built.patterns)}


def _cmd_rank(args, config) -> Any:
    index_path = _setting(args, config, "index", None)
    if index_path is None:
        raise ValueError("rank needs an index file (--index or config)")
    idx = index_mod.load(index_path)
    document = json.loads(Path(args.document).read_text())
    ranked, _ = index_mod.query_index(
        idx,
        document,
        alpha=float(_setting(args, config, "alpha", 0.5)),
        k=int(_setting(args, config, "k", 10)),
    )
    return index_mod.ranking_payload(ranked)


def _cmd_correct(args, config) -> Any:
    document = json.loads(Path(args.document).read_text())
    drawing = load_drawing(document)
    words = [w for w in Path(args.dictionary).read_text().split() if w]
    if not words:
        raise ValueError(f"dictionary {args.dictionary} is empty")
    pen = _penalties(config)
    cells = []
    for cell in drawing.cells:
        if cell.ocr is None:
            continue
        ranked = best_match(words, cell.ocr, pen)
        word, score = ranked[0]
        cells.append({"id": cell.id, "text": word, "score": score})
    return {"cells": cells}


def _cmd_serve(args, config) -> Any:
    index_path = _setting(args, config, "index", None)
    if index_path is None:
        raise ValueError("serve needs an index file (--index or config)")
    bind = _setting(args, config, "bind", "127.0.0.1:8571")
    service.serve(index_path, bind)
    return None


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="tdassist", description="technical drawing parser learning and search")
    parser.add_argument("--config", help=f"config file (or ${CONFIG_ENV})")
    parser.add_argument("--seed", type=int, default=None, help="example-order shuffle seed")
    parser.add_argument("--pretty", action="store_true", help="indent JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a bitmap drawing")
    p.add_argument("image")
    p.add_argument("--eps", type=float)
    p.add_argument("--threshold", type=int)
    p.add_argument("--min-pts", dest="min_pts", type=int)
    p.set_defaults(run=_cmd_segment)

    p = sub.add_parser("learn", help="learn parser programs from labeled drawings")
    p.add_argument("labeled_dir")
    p.add_argument("--bias")
    p.add_argument("--bootstrap", action="store_true")
    p.add_argument("--deps", help="manual dependency graph file")
    p.add_argument("--out", help="write learned programs to this file")
    p.add_argument("--depth", type=int)
    p.add_argument("--max-clause-len", dest="max_clause_len", type=int)
    p.add_argument("--node-bound", dest="node_bound", type=int)
    p.add_argument("--noise", type=int)
    p.set_defaults(run=_cmd_learn)

    p = sub.add_parser("parse", help="extract facts and labels from one document")
    p.add_argument("document")
    p.add_argument("--programs", required=True)
    p.add_argument("--depth", type=int)
    p.set_defaults(run=_cmd_parse)

    p = sub.add_parser("mine", help="mine frequent patterns over a corpus")
    p.add_argument("corpus_dir")
    p.add_argument("--min-support", dest="min_support", type=float)
    p.add_argument("--max-literals", dest="max_literals", type=int)
    p.add_argument("--programs")
    p.add_argument("--out", help="write the pattern set to this file")
    p.add_argument("--depth", type=int)
    p.set_defaults(run=_cmd_mine)

    p_index = sub.add_parser("index", help="design index operations")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p = index_sub.add_parser("build", help="build and persist an index")
    p.add_argument("corpus_dir")
    p.add_argument("--programs")
    p.add_argument("--out", dest="index")
    p.add_argument("--min-support", dest="min_support", type=float)
    p.add_argument("--max-literals", dest="max_literals", type=int)
    p.add_argument("--depth", type=int)
    p.set_defaults(run=_cmd_index_build)

    p = sub.add_parser("rank", help="rank indexed designs against a document")
    p.add_argument("document")
    p.add_argument("--index")
    p.add_argument("--alpha", type=float)
    p.add_argument("-k", dest="k", type=int)
    p.set_defaults(run=_cmd_rank)

    p = sub.add_parser("correct", help="correct OCR cell text against a dictionary")
    p.add_argument("document")
    p.add_argument("--dictionary", required=True)
    p.set_defaults(run=_cmd_correct)

    p = sub.add_parser("serve", help="serve the index over HTTP")
    p.add_argument("--index")
    p.add_argument("--bind")
    p.set_defaults(run=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        config = _load_config(args.config)
        payload = args.run(args, config)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if payload is not None:
        if args.pretty:
            print(json.dumps(payload, indent=2))
        else:
            print(json.dumps(payload, separators=(",", ":")))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
