"""Level-wise mining of frequent conjunctive patterns over drawing facts,
and propositionalization of drawings into binary feature vectors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .logic import (
    KB,
    Atom,
    Const,
    FactSet,
    Term,
    Var,
    canonical_var,
    format_atom,
    format_const,
    holds,
    parse_conjunction,
)

DEFAULT_MIN_SUPPORT = 0.10
DEFAULT_MAX_LITERALS = 6


class MiningConfigError(ValueError):
    pass


def _connected(literals: Sequence[Atom]) -> bool:
    seen: set[Var] = set()
    for i, lit in enumerate(literals):
        lit_vars = {a for a in lit.args if isinstance(a, Var)}
        if i and lit_vars.isdisjoint(seen):
            return False
        seen |= lit_vars
    return True


@dataclass(frozen=True)
class Pattern:
    """Connected existential conjunction over the extracted-fact vocabulary."""

    literals: tuple[Atom, ...]

    def __post_init__(self):
        if not self.literals:
            raise ValueError("empty pattern")
        ordered = _order_connected(self.literals)
        if ordered is None:
            raise ValueError(f"pattern is not connected: {self.literals}")
        object.__setattr__(self, "literals", ordered)

    @property
    def key(self) -> str:
        cached = self.__dict__.get("_key")
        if cached is None:
            cached = canonical_form(self)
            object.__setattr__(self, "_key", cached)
        return cached

    def __repr__(self) -> str:
        return ",".join(format_atom(a) for a in self.literals)


def _order_connected(literals: Sequence[Atom]) -> tuple[Atom, ...] | None:
    """Reorder so each literal shares a variable with an earlier one, or None."""
    if _connected(literals):
        return tuple(literals)
    remaining = list(literals)
    ordered = [remaining.pop(0)]
    seen = {a for a in ordered[0].args if isinstance(a, Var)}
    while remaining:
        for i, lit in enumerate(remaining):
            lit_vars = {a for a in lit.args if isinstance(a, Var)}
            if not lit_vars.isdisjoint(seen):
                ordered.append(remaining.pop(i))
                seen |= lit_vars
                break
        else:
            return None
    return tuple(ordered)


def parse_pattern(text: str) -> Pattern:
    return Pattern(parse_conjunction(text))


def _literal_sort_key(a: Atom):
    consts = tuple(
        (i, format_const(t.value)) for i, t in enumerate(a.args) if isinstance(t, Const)
    )
    return (a.pred, len(a.args), consts)


def canonical_form(p: Pattern) -> str:
    """Canonical text: equal iff patterns match up to renaming and literal order.

    Literals are sorted by predicate and constant signature; ties are broken
    by trying every permutation within a tied group and keeping the smallest
    rendering under first-occurrence variable renaming.
    """
    ordered = sorted(p.literals, key=_literal_sort_key)
    groups: list[list[Atom]] = []
    for atom in ordered:
        if groups and _literal_sort_key(groups[-1][0]) == _literal_sort_key(atom):
            groups[-1].append(atom)
        else:
            groups.append([atom])
    best: str | None = None
    for perm in itertools.product(*(itertools.permutations(g) for g in groups)):
        literals = [a for g in perm for a in g]
        mapping: dict[Var, Var] = {}
        parts = []
        for atom in literals:
            args: list[Term] = []
            for a in atom.args:
                if isinstance(a, Var):
                    if a not in mapping:
                        mapping[a] = canonical_var(len(mapping))
                    args.append(mapping[a])
                else:
                    args.append(a)
            parts.append(format_atom(Atom(atom.pred, tuple(args))))
        text = ",".join(parts)
        if best is None or text < best:
            best = text
    assert best is not None
    return best


def pattern_holds(p: Pattern, kb: KB | FactSet, depth: int = 12) -> bool:
    """True iff the existential conjunction is provable (one answer suffices)."""
    if isinstance(kb, FactSet):
        kb = KB((), kb)
    return holds(kb, p.literals, depth)


@dataclass(frozen=True)
class PatternSet:
    """Canonically ordered patterns with their drawing-support counts."""

    patterns: tuple[Pattern, ...]
    supports: tuple[int, ...]

    def __post_init__(self):
        if len(self.patterns) != len(self.supports):
            raise ValueError("patterns and supports differ in length")

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(p.key for p in self.patterns)

    def to_text(self) -> str:
        return "".join(
            f"{p.key}\t{s}\n" for p, s in zip(self.patterns, self.supports)
        )

    @classmethod
    def from_text(cls, text: str) -> "PatternSet":
        patterns, supports = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            body, _, count = line.rpartition("\t")
            if not body:
                raise ValueError(f"bad pattern line: {line!r}")
            patterns.append(parse_pattern(body))
            supports.append(int(count))
        return cls(tuple(patterns), tuple(supports))


@dataclass(frozen=True)
class FeatureVector:
    design_id: str
    bits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class BiasPredicate:
    """One predicate admitted into patterns; const_positions lists argument
    slots where frequent constants are enumerated."""

    pred: str
    arity: int
    const_positions: tuple[int, ...] = ()


MiningBias = tuple[BiasPredicate, ...]

TOKEN_BIAS = BiasPredicate("cell_contains", 2, (1,))


def default_bias(parser_targets: Mapping[str, int] | None = None) -> MiningBias:
    """Token containment plus every learned parser predicate."""
    bias = [TOKEN_BIAS]
    for label, arity in (parser_targets or {}).items():
        bias.append(BiasPredicate(label, arity))
    return tuple(bias)


def _frequent_constants(
    kbs: Sequence[KB], bias: MiningBias, min_count: float
) -> dict[tuple[str, int, int], list[Const]]:
    counts: dict[tuple[str, int, int, Const], int] = {}
    for kb in kbs:
        seen: set[tuple[str, int, int, Const]] = set()
        for atom in kb.facts:
            for bp in bias:
                if atom.pred == bp.pred and len(atom.args) == bp.arity:
                    for pos in bp.const_positions:
                        arg = atom.args[pos]
                        if isinstance(arg, Const):
                            seen.add((atom.pred, bp.arity, pos, arg))
        for key in seen:
            counts[key] = counts.get(key, 0) + 1
    out: dict[tuple[str, int, int], list[Const]] = {}
    for (pred, arity, pos, const), count in counts.items():
        if count >= min_count:
            out.setdefault((pred, arity, pos), []).append(const)
    for consts in out.values():
        consts.sort(key=lambda c: format_const(c.value))
    return out


def _level_one(bias: MiningBias, frequent: dict) -> list[Pattern]:
    candidates = []
    for bp in bias:
        args = tuple(Var(f"F{i}") for i in range(bp.arity))
        candidates.append(Pattern((Atom(bp.pred, args),)))
        for pos in bp.const_positions:
            for const in frequent.get((bp.pred, bp.arity, pos), ()):
                cargs = tuple(
                    const if i == pos else Var(f"F{i}") for i in range(bp.arity)
                )
                candidates.append(Pattern((Atom(bp.pred, cargs),)))
    return candidates


def _extensions(pattern: Pattern, bias: MiningBias, frequent: dict) -> list[Pattern]:
    """All one-literal connected extensions of `pattern`."""
    existing = list(
        dict.fromkeys(a for lit in pattern.literals for a in lit.args if isinstance(a, Var))
    )
    taken = {v.name for v in existing}
    out = []
    for bp in bias:
        slot_choices: list[list[Term | None]] = []
        for pos in range(bp.arity):
            choices: list[Term | None] = list(existing)
            choices.append(None)  # fresh variable
            if pos in bp.const_positions:
                choices.extend(frequent.get((bp.pred, bp.arity, pos), ()))
            slot_choices.append(choices)
        for combo in itertools.product(*slot_choices):
            if not any(isinstance(c, Var) for c in combo):
                continue  # must share a variable with the pattern
            args: list[Term] = []
            counter = 0
            for c in combo:
                if c is None:
                    while f"N{counter}" in taken:
                        counter += 1
                    args.append(Var(f"N{counter}"))
                    counter += 1
                else:
                    args.append(c)
            literal = Atom(bp.pred, tuple(args))
            if literal in pattern.literals:
                continue
            out.append(Pattern(pattern.literals + (literal,)))
    return out


def mine(
    corpus: Sequence[FactSet | KB],
    min_support_frac: float = DEFAULT_MIN_SUPPORT,
    max_literals: int = DEFAULT_MAX_LITERALS,
    bias: MiningBias | None = None,
    depth: int = 12,
) -> PatternSet:
    """Level-wise frequent-pattern search.

    Level 1 holds single literals (frequent constants enumerated per slot);
    each next level extends every frequent pattern by one connected literal.
    Support is the number of drawings on which the pattern is provable;
    candidates below min_support_frac of the corpus are pruned, duplicates
    collapse by canonical form.
    """
    if not corpus:
        raise ValueError("empty corpus")
    if not bias:
        raise MiningConfigError("mining bias declares no predicates")
    kbs = [KB((), f) if isinstance(f, FactSet) else f for f in corpus]
    min_count = min_support_frac * len(kbs) - 1e-9
    frequent_consts = _frequent_constants(kbs, bias, min_count)

    accepted: dict[str, tuple[Pattern, frozenset[int]]] = {}

    def support(p: Pattern, within: Iterable[int]) -> frozenset[int]:
        return frozenset(i for i in within if pattern_holds(p, kbs[i], depth))

    level: list[tuple[Pattern, frozenset[int]]] = []
    for p in _level_one(bias, frequent_consts):
        key = p.key
        if key in accepted:
            continue
        sup = support(p, range(len(kbs)))
        if len(sup) >= min_count:
            accepted[key] = (p, sup)
            level.append((p, sup))

    size = 1
    while level and size < max_literals:
        nxt: list[tuple[Pattern, frozenset[int]]] = []
        for pattern, sup in level:
            for ext in _extensions(pattern, bias, frequent_consts):
                key = ext.key
                if key in accepted:
                    continue
                ext_sup = support(ext, sup)
                if len(ext_sup) >= min_count:
                    accepted[key] = (ext, ext_sup)
                    nxt.append((ext, ext_sup))
        level = nxt
        size += 1

    ordered = sorted(accepted.items(), key=lambda kv: (len(kv[1][0].literals), kv[0]))
    # store patterns in canonical form so persisted and in-memory sets are equal
    return PatternSet(
        tuple(parse_pattern(key) for key, _ in ordered),
        tuple(len(sup) for _, (_, sup) in ordered),
    )


def vectorize(
    facts: FactSet | KB, patterns: PatternSet, depth: int = 12, design_id: str = ""
) -> FeatureVector:
    kb = KB((), facts) if isinstance(facts, FactSet) else facts
    bits = tuple(int(pattern_holds(p, kb, depth)) for p in patterns.patterns)
    return FeatureVector(design_id, bits)
