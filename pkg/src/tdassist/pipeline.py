"""Wiring between drawings and the learner, miner and index.

Builds learning tasks from labeled drawings (namespacing cell ids so the
corpus shares one fact set), runs standard and bootstrapped learning, and
materializes extracted facts for mining and indexing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import bootstrap as bs
from .drawing import Drawing, background_facts
from .ilp import (
    BASE_RULES,
    EvalReport,
    InduceResult,
    LearningTask,
    ModeDecl,
    SearchParams,
    derive_negatives,
    evaluate,
    induce,
    predict,
)
from .logic import KB, Atom, Clause, Const, FactSet, Program


def _prefix(drawing: Drawing) -> str:
    return f"{drawing.id}::"


def corpus_facts(drawings: Sequence[Drawing]) -> FactSet:
    merged = FactSet()
    for d in drawings:
        merged = merged | background_facts(d.with_prefixed_ids(_prefix(d)))
    return merged


def _label_atoms(drawing: Drawing, label: str, arity: int) -> list[Atom]:
    prefix = _prefix(drawing)
    atoms = []
    for cell_id, index in drawing.labels.get(label, ()):
        if arity == 2:
            if index is None:
                continue
            atoms.append(Atom(label, (Const(index), Const(prefix + cell_id))))
        else:
            atoms.append(Atom(label, (Const(prefix + cell_id),)))
    return atoms


def _label_universe(drawing: Drawing, label: str, arity: int) -> list[Atom]:
    prefix = _prefix(drawing)
    if arity == 1:
        return [Atom(label, (Const(prefix + c.id),)) for c in drawing.cells]
    indexes = [i for _, i in drawing.labels.get(label, ()) if i is not None]
    if not indexes:
        return []
    return [
        Atom(label, (Const(i), Const(prefix + c.id)))
        for i in range(max(indexes) + 1)
        for c in drawing.cells
    ]


def build_task(
    drawings: Sequence[Drawing],
    label: str,
    modes: Sequence[ModeDecl],
    params: SearchParams = SearchParams(),
    facts: FactSet | None = None,
    rng: random.Random | None = None,
) -> LearningTask:
    """One learning task: positives from annotations, negatives by complement.

    The negative universe of an indexed target spans indexes 0..max annotated
    row per drawing; drawings without the label contribute nothing for
    indexed targets and pure negatives otherwise.
    """
    head = next(
        (m for m in modes if m.kind == "head" and m.pred == label), None
    )
    if head is None:
        raise ValueError(f"no head mode for label {label!r}")
    arity = len(head.markers)
    if facts is None:
        facts = corpus_facts(drawings)
    pos: list[Atom] = []
    universe: list[Atom] = []
    for d in drawings:
        pos.extend(_label_atoms(d, label, arity))
        universe.extend(_label_universe(d, label, arity))
    neg = list(derive_negatives(universe, pos))
    if rng is not None:
        rng.shuffle(pos)
        rng.shuffle(neg)
    return LearningTask(
        target=(label, arity),
        pos=tuple(pos),
        neg=tuple(neg),
        facts=facts,
        modes=tuple(modes),
        params=params,
    )


def build_tasks(
    drawings: Sequence[Drawing],
    modes: Sequence[ModeDecl],
    params: SearchParams = SearchParams(),
    labels: Sequence[str] | None = None,
    seed: int | None = None,
) -> dict[str, LearningTask]:
    if labels is None:
        labels = [m.pred for m in modes if m.kind == "head"]
    facts = corpus_facts(drawings)
    rng = random.Random(seed) if seed is not None else None
    return {
        label: build_task(drawings, label, modes, params, facts=facts, rng=rng)
        for label in labels
    }


def learn_standard(tasks: Mapping[str, LearningTask]) -> dict[str, InduceResult]:
    return {label: induce(task) for label, task in tasks.items()}


@dataclass
class BootstrapRun:
    standard: dict[str, InduceResult]
    ranking: bs.TargetRanking
    graph: bs.DependencyGraph
    results: dict[str, InduceResult]


def learn_bootstrap(
    tasks: Mapping[str, LearningTask],
    graph: bs.DependencyGraph | None = None,
) -> BootstrapRun:
    """Standard pass to rank targets, then relearn along the dependency DAG."""
    standard = learn_standard(tasks)
    if graph is None:
        ranking = bs.rank_targets(
            {label: (res.program, res.f1) for label, res in standard.items()}
        )
        graph = bs.build_dependency_graph(ranking)
    else:
        ranking = bs.rank_targets(
            {label: (res.program, res.f1) for label, res in standard.items()}
        )
    results = bs.induce_bootstrap(tasks, graph)
    return BootstrapRun(standard, ranking, graph, results)


# ---------------------------------------------------------------------------
# Extraction for mining and indexing


def program_targets(programs: Mapping[str, Sequence[Clause]]) -> dict[str, int]:
    """Predicate arities of learned parser programs (empty programs skipped)."""
    targets = {}
    for label, program in programs.items():
        if program:
            targets[label] = len(program[0].head.args)
    return targets


def merged_rules(
    programs: Mapping[str, Sequence[Clause]] | None,
    rules: Program = BASE_RULES,
    exclude: str | None = None,
) -> Program:
    """Base rules plus every learned program; bootstrapped programs need
    their dependency predicates in scope to prove anything."""
    merged: tuple[Clause, ...] = tuple(rules)
    for label, program in (programs or {}).items():
        if label != exclude:
            merged = merged + tuple(program)
    return merged


def evaluate_programs(
    results: Mapping[str, InduceResult],
    drawings: Sequence[Drawing],
    depth: int = 12,
) -> dict[str, "EvalReport"]:
    """Test-set evaluation of every learned label, dependencies in scope."""
    programs = {label: res.program for label, res in results.items()}
    reports = {}
    for label, arity in program_targets(programs).items():
        rules = merged_rules(programs, exclude=label)
        reports[label] = evaluate(
            programs[label], drawings, (label, arity), rules=rules, depth=depth
        )
    return reports


def extract_facts(
    drawing: Drawing,
    programs: Mapping[str, Sequence[Clause]] | None = None,
    rules: Program = BASE_RULES,
    depth: int = 12,
) -> FactSet:
    """Background facts of one drawing plus all parser-derived atoms."""
    facts = background_facts(drawing)
    if not programs:
        return facts
    kb_rules = merged_rules(programs, rules)
    derived: list[Atom] = []
    for label, arity in program_targets(programs).items():
        derived.extend(predict((), drawing, (label, arity), kb_rules, depth))
    return facts | FactSet(derived)


def query_kb(
    drawing: Drawing,
    programs: Mapping[str, Sequence[Clause]] | None = None,
    rules: Program = BASE_RULES,
) -> KB:
    """KB for pattern evaluation over a (possibly partial) drawing."""
    return KB(merged_rules(programs, rules), background_facts(drawing))
