"""Bootstrapped relearning: rank targets, build the dependency DAG, relearn
each target with the programs of its dependencies added to the background."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .ilp import InduceResult, LearningTask, ModeDecl, induce
from .logic import Clause

log = logging.getLogger(__name__)


class DependencyCycleError(ValueError):
    pass


def program_size(program: Sequence[Clause]) -> int:
    """Program size in literals, heads included."""
    return sum(1 + len(c.body) for c in program)


@dataclass(frozen=True)
class RankedTarget:
    label: str
    f1: float
    size: int


@dataclass(frozen=True)
class TargetRanking:
    """Ascending training F1; equal scores put the larger program first
    (treated as the harder target), residual ties alphabetical."""

    entries: tuple[RankedTarget, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)


def rank_targets(results: Mapping[str, tuple[Sequence[Clause], float]]) -> TargetRanking:
    entries = [
        RankedTarget(label, f1, program_size(program))
        for label, (program, f1) in results.items()
    ]
    entries.sort(key=lambda e: (e.f1, -e.size, e.label))
    return TargetRanking(tuple(entries))


@dataclass(frozen=True)
class DependencyGraph:
    """Directed edges dependent -> dependency; must be acyclic."""

    deps: dict[str, tuple[str, ...]]

    def nodes(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for label, targets in self.deps.items():
            seen.setdefault(label)
            for t in targets:
                seen.setdefault(t)
        return tuple(seen)

    def descendants(self, label: str) -> tuple[str, ...]:
        out: dict[str, None] = {}
        stack = list(self.deps.get(label, ()))
        while stack:
            d = stack.pop(0)
            if d in out:
                continue
            out.setdefault(d)
            stack.extend(self.deps.get(d, ()))
        return tuple(out)


def build_dependency_graph(ranking: TargetRanking) -> DependencyGraph:
    """Each target depends on every target ranked after it."""
    if not ranking.entries:
        raise ValueError("empty ranking")
    labels = ranking.labels
    deps = {label: tuple(labels[i + 1 :]) for i, label in enumerate(labels)}
    graph = DependencyGraph(deps)
    learning_order(graph)  # acyclicity by construction, but keep the check uniform
    return graph


def parse_dependency_file(text: str) -> DependencyGraph:
    """Manual graph: one `dependent -> dependency` per line."""
    deps: dict[str, list[str]] = {}
    for raw in text.splitlines():
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ValueError(f"expected 'a -> b', got {line!r}")
        left, right = (part.strip() for part in line.split("->", 1))
        if not left or not right:
            raise ValueError(f"expected 'a -> b', got {line!r}")
        deps.setdefault(left, [])
        if right not in deps[left]:
            deps[left].append(right)
    graph = DependencyGraph({k: tuple(v) for k, v in deps.items()})
    learning_order(graph)
    return graph


def learning_order(graph: DependencyGraph, extra_labels: Sequence[str] = ()) -> tuple[str, ...]:
    """Topological order with dependencies first; ties resolve alphabetically."""
    nodes: dict[str, None] = {}
    for n in graph.nodes():
        nodes.setdefault(n)
    for n in extra_labels:
        nodes.setdefault(n)
    remaining = dict.fromkeys(nodes)
    order: list[str] = []
    emitted: set[str] = set()
    while remaining:
        ready = sorted(
            n for n in remaining if all(d in emitted for d in graph.deps.get(n, ()))
        )
        if not ready:
            raise DependencyCycleError(f"dependency cycle among {sorted(remaining)}")
        for n in ready:
            order.append(n)
            emitted.add(n)
            del remaining[n]
    return tuple(order)


def _dependency_mode(label: str, head_mode: ModeDecl) -> ModeDecl:
    markers = tuple("-" if m == "-" else "+" for m in head_mode.markers)
    return ModeDecl("body", label, markers, head_mode.types)


def induce_bootstrap(
    tasks: Mapping[str, LearningTask],
    graph: DependencyGraph,
) -> dict[str, InduceResult]:
    """Relearn every task in dependency order, extending each task's
    background rules and body modes with its descendants' learned programs."""
    order = learning_order(graph, extra_labels=tuple(tasks))
    results: dict[str, InduceResult] = {}
    for label in order:
        if label not in tasks:
            raise KeyError(f"dependency graph names unknown target {label!r}")
        task = tasks[label]
        extra_rules: list[Clause] = []
        extra_modes: list[ModeDecl] = []
        wanted = set(graph.descendants(label))
        for dep in order:
            if dep not in wanted or dep == label:
                continue
            dep_result = results[dep]
            if not dep_result.program:
                continue
            extra_rules.extend(dep_result.program)
            mode = _dependency_mode(dep, tasks[dep].head_mode)
            if mode not in task.modes and mode not in extra_modes:
                extra_modes.append(mode)
        if extra_rules or extra_modes:
            task = replace(
                task,
                rules=task.rules + tuple(extra_rules),
                modes=task.modes + tuple(extra_modes),
            )
        log.info("bootstrap learning %s with %d injected clauses", label, len(extra_rules))
        results[label] = induce(task)
    return results
