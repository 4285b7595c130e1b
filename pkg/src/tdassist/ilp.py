"""Bottom-clause saturation and coverage-guided clause search.

The learner follows the classic set-covering loop: saturate the first
uncovered positive example into a most-specific bottom clause, run a
best-first general-to-specific search over its body literals scored by
compression, add the winning clause, repeat.  The target predicate is kept
available as example facts during search so recursive clauses can be scored
before a base case exists.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import re
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .drawing import Drawing, background_facts
from .logic import (
    KB,
    Atom,
    Clause,
    Const,
    FactSet,
    Program,
    Var,
    canonical_var,
    holds,
    parse_program,
    prove,
    resolve,
    solve_conjunction,
    unify,
)

log = logging.getLogger(__name__)

# zero/1 anchors indexed tables; always part of the learning background.
BASE_RULES: Program = parse_program("zero(0).")

# Background predicates carrying a well-founded order: succ(X, Y) makes X
# the strictly smaller index, adjacency puts the lower/right cell second.
_SUCC = "succ"
_DESCENT_ADJACENCY = ("above_below", "left_right")


class BiasError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class ModeDecl:
    """Declarative bias: head or body schema with +input/-output/#constant markers."""

    kind: str  # "head" | "body"
    pred: str
    markers: tuple[str, ...]
    types: tuple[str, ...]

    @property
    def key(self) -> tuple[str, int]:
        return (self.pred, len(self.markers))

    def __repr__(self) -> str:
        args = ",".join(m + t for m, t in zip(self.markers, self.types))
        return f"{self.kind} {self.pred}({args})"


_MODE_RE = re.compile(r"(head|body)\s+([a-z][a-zA-Z0-9_]*)\s*\(([^)]*)\)\s*\Z")


def parse_mode(line: str) -> ModeDecl:
    m = _MODE_RE.match(line.strip())
    if not m:
        raise BiasError(f"bad mode declaration: {line!r}")
    kind, pred, argtext = m.groups()
    markers, types = [], []
    for part in argtext.split(","):
        part = part.strip()
        if not part or part[0] not in "+-#":
            raise BiasError(f"argument needs a +/-/# marker in {line!r}")
        markers.append(part[0])
        types.append(part[1:].strip())
    return ModeDecl(kind, pred, tuple(markers), tuple(types))


def parse_bias(text: str) -> tuple[ModeDecl, ...]:
    modes = []
    for raw in text.splitlines():
        line = raw.split("%", 1)[0].strip()
        if line:
            modes.append(parse_mode(line))
    if not any(m.kind == "head" for m in modes):
        raise BiasError("bias declares no head mode")
    if not any(m.kind == "body" for m in modes):
        raise BiasError("bias declares no body mode")
    return tuple(modes)


@dataclass(frozen=True)
class SearchParams:
    proof_depth: int = 12
    max_clause_len: int = 5  # literals including the head
    node_bound: int = 60000
    noise: int = 0
    saturation_layers: int = 3
    saturation_cap: int = 64

    def __post_init__(self):
        for name in ("proof_depth", "max_clause_len", "node_bound", "saturation_layers", "saturation_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")


@dataclass(frozen=True)
class LearningTask:
    target: tuple[str, int]
    pos: tuple[Atom, ...]
    neg: tuple[Atom, ...]
    facts: FactSet
    modes: tuple[ModeDecl, ...]
    rules: Program = BASE_RULES
    params: SearchParams = SearchParams()

    def __post_init__(self):
        overlap = set(self.pos) & set(self.neg)
        if overlap:
            raise ValueError(f"examples overlap: {sorted(map(str, overlap))[:3]}")

    @property
    def head_mode(self) -> ModeDecl:
        for m in self.modes:
            if m.kind == "head" and m.key == self.target:
                return m
        raise BiasError(f"no head mode for target {self.target[0]}/{self.target[1]}")


def derive_negatives(universe: Sequence[Atom], positives: Iterable[Atom]) -> tuple[Atom, ...]:
    """Complement of the positives within the example universe, order kept."""
    pos = set(positives)
    missing = pos - set(universe)
    if missing:
        raise ValueError(f"positives outside universe: {sorted(map(str, missing))[:3]}")
    return tuple(a for a in universe if a not in pos)


# ---------------------------------------------------------------------------
# Saturation


@dataclass(frozen=True)
class BottomLiteral:
    atom: Atom
    inputs: frozenset[Var]
    outputs: frozenset[Var]


@dataclass(frozen=True)
class BottomClause:
    head: Atom
    literals: tuple[BottomLiteral, ...]

    @property
    def clause(self) -> Clause:
        return Clause(self.head, tuple(l.atom for l in self.literals))


def saturate(seed: Atom, task: LearningTask) -> BottomClause:
    """Most specific clause for `seed`: every mode-conformant literal derivable
    from the background within the saturation layers, truncated at the cap.

    Other positive examples are available as facts (the seed itself is not),
    so a recursion mode contributes target literals.
    """
    params = task.params
    head_mode = task.head_mode
    if len(seed.args) != len(head_mode.markers):
        raise ValueError(f"seed {seed} does not match head mode {head_mode}")

    kb = KB(task.rules, task.facts.union(a for a in task.pos if a != seed))

    var_for: dict[tuple[str, object], Var] = {}
    in_terms: dict[str, dict[object, None]] = {}

    def var_of(typ: str, value) -> Var:
        key = (typ, value)
        v = var_for.get(key)
        if v is None:
            v = canonical_var(len(var_for))
            var_for[key] = v
        return v

    def know(typ: str, value) -> None:
        in_terms.setdefault(typ, {}).setdefault(value)

    head_args: list = []
    for marker, typ, arg in zip(head_mode.markers, head_mode.types, seed.args):
        if not isinstance(arg, Const):
            raise ValueError(f"seed {seed} is not ground")
        if marker == "#":
            head_args.append(arg)
        else:
            head_args.append(var_of(typ, arg.value))
            know(typ, arg.value)
    head = Atom(seed.pred, tuple(head_args))

    literals: list[BottomLiteral] = []
    seen: set[Atom] = set()
    body_modes = [m for m in task.modes if m.kind == "body"]

    for _layer in range(params.saturation_layers):
        grew = False
        for mode in body_modes:
            input_values = [
                list(in_terms.get(typ, {}))
                for marker, typ in zip(mode.markers, mode.types)
                if marker == "+"
            ]
            for combo in itertools.product(*input_values):
                goal_args: list = []
                query_vars: list[Var] = []
                it = iter(combo)
                for i, marker in enumerate(mode.markers):
                    if marker == "+":
                        goal_args.append(Const(next(it)))
                    else:
                        q = Var(f"_Q{i}")
                        goal_args.append(q)
                        query_vars.append(q)
                goal = Atom(mode.pred, tuple(goal_args))
                answers = solve_conjunction(kb, [goal], params.proof_depth, exclude=seed)
                for ans in answers:
                    ground = resolve(goal, ans)
                    if not ground.is_ground():
                        continue
                    lit_args: list = []
                    inputs: set[Var] = set()
                    outputs: set[Var] = set()
                    for marker, typ, arg in zip(mode.markers, mode.types, ground.args):
                        if marker == "#":
                            lit_args.append(arg)
                            continue
                        v = var_of(typ, arg.value)
                        lit_args.append(v)
                        if marker == "+":
                            inputs.add(v)
                        else:
                            outputs.add(v)
                            know(typ, arg.value)
                    atom = Atom(mode.pred, tuple(lit_args))
                    if atom == head or atom in seen:
                        continue
                    if len(literals) >= params.saturation_cap:
                        log.debug("saturation cap reached for seed %s", seed)
                        return BottomClause(head, tuple(literals))
                    seen.add(atom)
                    literals.append(BottomLiteral(atom, frozenset(inputs), frozenset(outputs)))
                    grew = True
        if not grew:
            break
    if not literals:
        log.info("seed %s is not connected to the background; empty bottom clause", seed)
    return BottomClause(head, tuple(literals))


# ---------------------------------------------------------------------------
# Clause search


def _recursion_admissible(
    head: Atom,
    body: Sequence[Atom],
    target: tuple[str, int],
    ordinal_positions: tuple[int, ...],
) -> bool:
    """Recursive literals must make well-founded progress.

    Indexed targets must consume a strictly smaller index: the recursive
    literal's index argument has to be the smaller side of a succ literal in
    the body, never the head's own index.  Index-less targets may instead
    step down/right through an adjacency literal.  Self-copies are always
    rejected.  Without this, search falls for same-index recursion through a
    sibling cell (up one row, sideways, back down), which scores well under
    examples-as-facts coverage but anchors nothing at parse time.
    """

    def smaller_via_succ(arg) -> bool:
        return any(
            other.pred == _SUCC and len(other.args) == 2 and other.args[0] == arg
            for other in body
        )

    def adjacency_descent(lit: Atom, arg) -> bool:
        return any(
            other is not lit
            and other.pred in _DESCENT_ADJACENCY
            and len(other.args) == 2
            and other.args[1] == arg
            for other in body
        )

    for lit in body:
        if (lit.pred, len(lit.args)) != target:
            continue
        if lit.args == head.args:
            return False
        if ordinal_positions:
            ok = any(
                isinstance(lit.args[p], Var)
                and lit.args[p] != head.args[p]
                and smaller_via_succ(lit.args[p])
                for p in ordinal_positions
            )
        else:
            ok = any(
                isinstance(arg, Var) and adjacency_descent(lit, arg) for arg in lit.args
            )
        if not ok:
            return False
    return True


def _ordinal_positions(task: LearningTask) -> tuple[int, ...]:
    """Head argument positions whose type is ordered by a succ body mode."""
    succ_types: set[str] = set()
    for m in task.modes:
        if m.kind == "body" and m.pred == _SUCC and len(m.markers) == 2:
            succ_types.update(m.types)
    return tuple(
        i for i, typ in enumerate(task.head_mode.types) if typ in succ_types
    )


def _covers(
    head: Atom,
    body: Sequence[Atom],
    example: Atom,
    kb: KB,
    depth: int,
    exclude: Atom | None,
) -> bool:
    theta = unify(head, example)
    if theta is None:
        return False
    goals = [resolve(b, theta) for b in body]
    return holds(kb, goals, depth, exclude=exclude)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class _Node:
    indices: frozenset[int]
    body: tuple[Atom, ...]
    bound: frozenset[Var]
    pos_mask: int
    neg_mask: int

    @property
    def score(self) -> int:
        return self.pos_mask.bit_count() - self.neg_mask.bit_count() - len(self.body) + 1


@dataclass
class SearchOutcome:
    clause: Clause | None
    evaluated: int
    score: int | None


def search_clause(
    bottom: BottomClause,
    task: LearningTask,
    pos: Sequence[Atom] | None = None,
) -> SearchOutcome:
    """Best-first search over connected subsets of the bottom-clause body.

    Scored by compression P - N - L + 1 where P counts covered remaining
    positives, N covered negatives, L body literals.  Only clauses covering
    at most `noise` negatives qualify; ties prefer shorter bodies, then the
    first clause found.  Returns no clause when nothing qualifies.
    """
    params = task.params
    pos = list(task.pos if pos is None else pos)
    neg = list(task.neg)
    if not pos:
        return SearchOutcome(None, 0, None)
    kb = KB(task.rules, task.facts.union(task.pos))
    depth = max(1, params.proof_depth - 1)
    head = bottom.head
    max_body = params.max_clause_len - 1

    def pos_covered(body: tuple[Atom, ...], mask: int) -> int:
        out = 0
        for i in _bits(mask):
            if _covers(head, body, pos[i], kb, depth, exclude=pos[i]):
                out |= 1 << i
        return out

    def neg_covered(body: tuple[Atom, ...], mask: int) -> int:
        out = 0
        for i in _bits(mask):
            if _covers(head, body, neg[i], kb, depth, exclude=None):
                out |= 1 << i
        return out

    head_vars = frozenset(a for a in head.args if isinstance(a, Var))
    root = _Node(
        frozenset(),
        (),
        head_vars,
        (1 << len(pos)) - 1,
        (1 << len(neg)) - 1,
    )
    best: Clause | None = None
    best_score = None
    best_len = None

    def consider(node: _Node) -> None:
        nonlocal best, best_score, best_len
        if node.neg_mask.bit_count() > params.noise or not node.pos_mask:
            return
        body_vars = {a for lit in node.body for a in lit.args if isinstance(a, Var)}
        if not head_vars <= body_vars:
            return  # free head variables never ground at parse time
        score = node.score
        if (
            best_score is None
            or score > best_score
            or (score == best_score and len(node.body) < best_len)
        ):
            best = Clause(head, node.body)
            best_score = score
            best_len = len(node.body)

    consider(root)
    heap: list[tuple[int, int, _Node]] = [(-root.score, 0, root)]
    seen: set[frozenset[int]] = {root.indices}
    seq = itertools.count(1)
    evaluated = 0
    target = task.target
    ordinal = _ordinal_positions(task)

    while heap and evaluated < params.node_bound:
        _, _, node = heapq.heappop(heap)
        upper = node.pos_mask.bit_count() - len(node.body)
        if best_score is not None and upper <= best_score:
            continue
        if len(node.body) >= max_body:
            continue
        for j, lit in enumerate(bottom.literals):
            if j in node.indices or not lit.inputs <= node.bound:
                continue
            indices = node.indices | {j}
            if indices in seen:
                continue
            seen.add(indices)
            body = node.body + (lit.atom,)
            if not _recursion_admissible(head, body, target, ordinal):
                continue
            pos_mask = pos_covered(body, node.pos_mask)
            evaluated += 1
            if not pos_mask:
                continue  # dead branch: descendants cover nothing either
            neg_mask = neg_covered(body, node.neg_mask)
            child = _Node(indices, body, node.bound | lit.outputs, pos_mask, neg_mask)
            consider(child)
            heapq.heappush(heap, (-child.score, next(seq), child))
            if evaluated >= params.node_bound:
                break
    return SearchOutcome(best, evaluated, best_score)


# ---------------------------------------------------------------------------
# Cover loop


@dataclass
class InduceResult:
    program: Program
    precision: float
    recall: float
    f1: float

    @property
    def size_literals(self) -> int:
        return sum(1 + len(c.body) for c in self.program)


def _with_recursion_mode(task: LearningTask) -> LearningTask:
    name, arity = task.target
    if any(m.kind == "body" and m.key == task.target for m in task.modes):
        return task
    head_mode = task.head_mode
    rec = ModeDecl("body", name, ("+",) * arity, head_mode.types)
    return replace(task, modes=task.modes + (rec,))


def induce(task: LearningTask) -> InduceResult:
    """Greedy cover loop; returns the learned program and training metrics."""
    task = _with_recursion_mode(task)
    params = task.params
    kb_cov = KB(task.rules, task.facts.union(task.pos))
    depth = max(1, params.proof_depth - 1)

    remaining = list(task.pos)
    learned: list[Clause] = []
    while remaining:
        seed = remaining[0]
        bottom = saturate(seed, task)
        outcome = search_clause(bottom, task, remaining)
        if outcome.clause is None:
            log.info("no clause for target %s within noise bound; stopping", task.target[0])
            break
        clause = outcome.clause
        learned.append(clause)
        covered = [
            e
            for e in remaining
            if _covers(clause.head, clause.body, e, kb_cov, depth, exclude=e)
        ]
        if not covered:
            break
        covered_set = set(covered)
        remaining = [e for e in remaining if e not in covered_set]
    learned = _reduce(learned, task)
    return _result(tuple(learned), task)


def _program_covered(program: Sequence[Clause], task: LearningTask, examples: Sequence[Atom]) -> frozenset[Atom]:
    kb = KB(task.rules + tuple(program), task.facts)
    depth = task.params.proof_depth
    return frozenset(e for e in examples if holds(kb, [e], depth))


def _reduce(program: list[Clause], task: LearningTask) -> list[Clause]:
    """Drop clauses that no longer contribute coverage (greedy overlap cleanup)."""
    if not program:
        return program
    baseline = _program_covered(program, task, task.pos)
    changed = True
    while changed and len(program) > 1:
        changed = False
        for i in range(len(program)):
            trimmed = program[:i] + program[i + 1 :]
            if _program_covered(trimmed, task, task.pos) == baseline:
                program = trimmed
                changed = True
                break
    return program


def _result(program: Program, task: LearningTask) -> InduceResult:
    covered_pos = _program_covered(program, task, task.pos)
    covered_neg = _program_covered(program, task, task.neg)
    tp, fp, fn = len(covered_pos), len(covered_neg), len(task.pos) - len(covered_pos)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return InduceResult(program, precision, recall, f1)


# ---------------------------------------------------------------------------
# Evaluation on labeled drawings


@dataclass(frozen=True)
class DrawingErrors:
    drawing_id: str
    false_positives: tuple[Atom, ...]
    false_negatives: tuple[Atom, ...]


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    per_drawing: tuple[DrawingErrors, ...]


def gold_atoms(drawing: Drawing, label: str, arity: int) -> tuple[Atom, ...]:
    atoms = []
    for cell_id, index in drawing.labels.get(label, ()):
        if arity == 2:
            if index is None:
                continue
            atoms.append(Atom(label, (Const(index), Const(cell_id))))
        else:
            atoms.append(Atom(label, (Const(cell_id),)))
    return tuple(atoms)


def predict(
    program: Sequence[Clause],
    drawing: Drawing,
    target: tuple[str, int],
    rules: Program = BASE_RULES,
    depth: int = 12,
) -> tuple[Atom, ...]:
    """All provable target atoms over one drawing's facts."""
    name, arity = target
    kb = KB(tuple(rules) + tuple(program), background_facts(drawing))
    goal = Atom(name, tuple(Var(f"_G{i}") for i in range(arity)))
    answers = prove(kb, goal, depth)
    preds: dict[Atom, None] = {}
    for ans in answers:
        atom = resolve(goal, ans)
        if atom.is_ground():
            preds.setdefault(atom)
    return tuple(preds)


def evaluate(
    program: Sequence[Clause],
    drawings: Sequence[Drawing],
    target: tuple[str, int],
    rules: Program = BASE_RULES,
    depth: int = 12,
) -> EvalReport:
    """Micro-averaged precision/recall/F1 of a program against annotations."""
    name, arity = target
    tp = fp = fn = 0
    per_drawing = []
    for drawing in drawings:
        predicted = set(predict(program, drawing, target, rules, depth))
        gold = set(gold_atoms(drawing, name, arity))
        false_pos = sorted(predicted - gold, key=str)
        false_neg = sorted(gold - predicted, key=str)
        tp += len(predicted & gold)
        fp += len(false_pos)
        fn += len(false_neg)
        per_drawing.append(DrawingErrors(drawing.id, tuple(false_pos), tuple(false_neg)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(precision, recall, f1, tuple(per_drawing))
