"""First-order terms, clauses, unification, and depth-bounded SLD proof."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: str | int | float

    def __repr__(self) -> str:
        return format_const(self.value)


Term = Var | Const


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def is_ground(self) -> bool:
        return not any(isinstance(a, Var) for a in self.args)

    def __repr__(self) -> str:
        return format_atom(self)


@dataclass(frozen=True, slots=True)
class Clause:
    """Definite clause: one head atom, conjunctive body."""

    head: Atom
    body: tuple[Atom, ...] = ()

    def __repr__(self) -> str:
        return format_clause(self)


Program = tuple[Clause, ...]

Substitution = dict[Var, Term]


class FactSet:
    """Insertion-ordered, de-duplicated set of fact atoms with predicate indexes.

    Facts are normally ground; partial designs contribute atoms carrying
    placeholder variables, which are standardized apart on each use.
    """

    __slots__ = ("atoms", "_by_pred", "_by_pos", "_var_positions")

    def __init__(self, atoms: Iterable[Atom] = ()):
        seen: dict[Atom, None] = {}
        for a in atoms:
            seen.setdefault(a)
        self.atoms: tuple[Atom, ...] = tuple(seen)
        by_pred: dict[tuple[str, int], list[Atom]] = {}
        by_pos: dict[tuple[str, int, int, Term], list[Atom]] = {}
        var_positions: set[tuple[str, int, int]] = set()
        for a in self.atoms:
            by_pred.setdefault(a.key, []).append(a)
            for i, arg in enumerate(a.args):
                if isinstance(arg, Const):
                    by_pos.setdefault((a.pred, len(a.args), i, arg), []).append(a)
                else:
                    var_positions.add((a.pred, len(a.args), i))
        self._by_pred = by_pred
        self._by_pos = by_pos
        self._var_positions = var_positions

    def candidates(self, goal: Atom) -> Sequence[Atom]:
        """Facts that could match `goal` (goal already dereferenced).

        Narrows by the first ground argument position, unless some fact has a
        variable there (a placeholder), in which case the full predicate list
        is scanned to preserve insertion order.
        """
        for i, arg in enumerate(goal.args):
            if isinstance(arg, Const):
                if (goal.pred, len(goal.args), i) in self._var_positions:
                    break
                return self._by_pos.get((goal.pred, len(goal.args), i, arg), ())
        return self._by_pred.get(goal.key, ())

    def union(self, other: "FactSet | Iterable[Atom]") -> "FactSet":
        extra = other.atoms if isinstance(other, FactSet) else tuple(other)
        return FactSet(self.atoms + extra)

    def __or__(self, other: "FactSet") -> "FactSet":
        return self.union(other)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._by_pred.get(atom.key, ()) if isinstance(atom, Atom) else False

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FactSet) and self.atoms == other.atoms

    def __repr__(self) -> str:
        return f"FactSet({len(self.atoms)} atoms)"


class KB:
    """Immutable knowledge base: program clauses plus extensional facts."""

    __slots__ = ("program", "facts", "_clauses_by_pred")

    def __init__(self, program: Iterable[Clause] = (), facts: FactSet | None = None):
        self.program: Program = tuple(program)
        self.facts: FactSet = facts if facts is not None else FactSet()
        clauses: dict[tuple[str, int], list[Clause]] = {}
        for c in self.program:
            clauses.setdefault(c.head.key, []).append(c)
        self._clauses_by_pred = clauses

    def clauses_for(self, goal: Atom) -> Sequence[Clause]:
        return self._clauses_by_pred.get(goal.key, ())

    def extended(self, program: Iterable[Clause] = (), facts: Iterable[Atom] = ()) -> "KB":
        extra = tuple(facts)
        return KB(self.program + tuple(program), self.facts.union(extra) if extra else self.facts)


# ---------------------------------------------------------------------------
# Unification


def _walk(t: Term, bindings: Substitution) -> Term:
    while isinstance(t, Var):
        nxt = bindings.get(t)
        if nxt is None or nxt == t:  # answer snapshots map unbound vars to themselves
            return t
        t = nxt
    return t


def _occurs(v: Var, t: Term, bindings: Substitution) -> bool:
    t = _walk(t, bindings)
    return t == v


def _unify_terms(a: Term, b: Term, bindings: Substitution, trail: list[Var]) -> bool:
    a = _walk(a, bindings)
    b = _walk(b, bindings)
    if a == b:
        return True
    if isinstance(a, Var):
        if _occurs(a, b, bindings):
            return False
        bindings[a] = b
        trail.append(a)
        return True
    if isinstance(b, Var):
        bindings[b] = a
        trail.append(b)
        return True
    return False


def _unify_atoms(a: Atom, b: Atom, bindings: Substitution, trail: list[Var]) -> bool:
    if a.pred != b.pred or len(a.args) != len(b.args):
        return False
    for x, y in zip(a.args, b.args):
        if not _unify_terms(x, y, bindings, trail):
            return False
    return True


def _undo(bindings: Substitution, trail: list[Var], mark: int) -> None:
    while len(trail) > mark:
        del bindings[trail.pop()]


def unify(a: Atom, b: Atom) -> Substitution | None:
    """Most general unifier of two atoms (with occurs check), or None."""
    bindings: Substitution = {}
    trail: list[Var] = []
    if _unify_atoms(a, b, bindings, trail):
        return bindings
    return None


def resolve(atom: Atom, bindings: Substitution) -> Atom:
    """Apply bindings to an atom, dereferencing variable chains."""
    if not atom.args:
        return atom
    return Atom(atom.pred, tuple(_walk(a, bindings) for a in atom.args))


# ---------------------------------------------------------------------------
# Depth-bounded proof
#
# Depth is the resolution depth of the proof tree: resolving a goal against a
# program clause costs one unit and proves every body atom at depth - 1.
# Matching an extensional fact is free, so `depth_limit` bounds how many rule
# expansions may be stacked, not how many facts a proof touches.  Derivations
# that would exceed the limit are silently cut.


class _Solver:
    def __init__(self, kb: KB, tabled: bool = True, exclude: Atom | None = None):
        self.kb = kb
        self.tabled = tabled
        self.exclude = exclude
        self.bindings: Substitution = {}
        self.trail: list[Var] = []
        self._fresh = 0
        # memo: canonical ground goal -> list of (depth, provable, cut)
        self._memo: dict[Atom, list[tuple[int, bool, bool]]] = {}
        self._cut_stack: list[bool] = [False]

    def _mark_cut(self) -> None:
        self._cut_stack[-1] = True

    def _rename_atom(self, atom: Atom, mapping: dict[Var, Var]) -> Atom:
        args = []
        for a in atom.args:
            if isinstance(a, Var):
                r = mapping.get(a)
                if r is None:
                    self._fresh += 1
                    r = Var(f"_R{self._fresh}")
                    mapping[a] = r
                args.append(r)
            else:
                args.append(a)
        return Atom(atom.pred, tuple(args))

    def solve(self, goals: Sequence[Atom], depth: int) -> Iterator[None]:
        """Yield once per solution of the conjunction; bindings hold the answer."""
        if not goals:
            yield None
            return
        first, rest = goals[0], goals[1:]
        for _ in self.solve_goal(first, depth):
            yield from self.solve(rest, depth)

    def solve_goal(self, goal: Atom, depth: int) -> Iterator[None]:
        g = resolve(goal, self.bindings)
        if self.tabled and g.is_ground() and self.exclude is None:
            ok, cut = self._provable_ground(g, depth)
            if cut:
                self._mark_cut()
            if ok:
                yield None
            return
        yield from self._expand(g, depth)

    def _expand(self, g: Atom, depth: int) -> Iterator[None]:
        clauses = self.kb.clauses_for(g)
        if clauses:
            if depth < 1:
                self._mark_cut()
            else:
                for clause in clauses:
                    mapping: dict[Var, Var] = {}
                    head = self._rename_atom(clause.head, mapping)
                    mark = len(self.trail)
                    if _unify_atoms(head, g, self.bindings, self.trail):
                        body = tuple(self._rename_atom(b, mapping) for b in clause.body)
                        yield from self.solve(body, depth - 1)
                    _undo(self.bindings, self.trail, mark)
        for fact in self.kb.facts.candidates(g):
            if self.exclude is not None and fact == self.exclude:
                continue
            if not fact.is_ground():
                fact = self._rename_atom(fact, {})
            mark = len(self.trail)
            if _unify_atoms(fact, g, self.bindings, self.trail):
                yield None
            _undo(self.bindings, self.trail, mark)

    def _provable_ground(self, g: Atom, depth: int) -> tuple[bool, bool]:
        entries = self._memo.get(g)
        if entries is not None:
            for d, ok, cut in entries:
                if d == depth:
                    return ok, cut
                # Answers grow monotonically with depth; uncut failures are final.
                if ok and d <= depth:
                    return True, False
                if not ok and not cut:
                    return False, False
                if not ok and d >= depth:
                    return False, cut
        self._cut_stack.append(False)
        ok = False
        mark = len(self.trail)
        for _ in self._expand(g, depth):
            ok = True
            break
        # Abandoning the generator mid-proof skips its own unwinding.
        _undo(self.bindings, self.trail, mark)
        cut = self._cut_stack.pop()
        if ok:
            cut = False
        self._memo.setdefault(g, []).append((depth, ok, cut))
        return ok, cut

    def snapshot(self, variables: Iterable[Var]) -> Substitution:
        return {v: _walk(v, self.bindings) for v in variables}


def atom_vars(atom: Atom) -> tuple[Var, ...]:
    seen: dict[Var, None] = {}
    for a in atom.args:
        if isinstance(a, Var):
            seen.setdefault(a)
    return tuple(seen)


def conjunction_vars(atoms: Sequence[Atom]) -> tuple[Var, ...]:
    seen: dict[Var, None] = {}
    for atom in atoms:
        for v in atom_vars(atom):
            seen.setdefault(v)
    return tuple(seen)


def prove(kb: KB, goal: Atom, depth_limit: int, tabled: bool = True) -> list[Substitution]:
    """All answer substitutions for `goal` reachable within `depth_limit`.

    Deterministic enumeration: program clauses in order, then facts in
    insertion order.  Duplicate answers are dropped, keeping first discovery.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be >= 1")
    return solve_conjunction(kb, [goal], depth_limit, tabled=tabled)


def solve_conjunction(
    kb: KB,
    goals: Sequence[Atom],
    depth_limit: int,
    tabled: bool = True,
    exclude: Atom | None = None,
) -> list[Substitution]:
    solver = _Solver(kb, tabled=tabled, exclude=exclude)
    variables = conjunction_vars(goals)
    answers: list[Substitution] = []
    seen: set[tuple] = set()
    for _ in solver.solve(tuple(goals), depth_limit):
        ans = solver.snapshot(variables)
        key = tuple(ans[v] for v in variables)
        if key not in seen:
            seen.add(key)
            answers.append(ans)
    return answers


def holds(
    kb: KB,
    goals: Sequence[Atom],
    depth_limit: int,
    exclude: Atom | None = None,
) -> bool:
    """True iff the conjunction has at least one solution within the depth."""
    solver = _Solver(kb, exclude=exclude)
    for _ in solver.solve(tuple(goals), depth_limit):
        return True
    return False


# ---------------------------------------------------------------------------
# Textual clause syntax, as in learned-parser listings:
#   materials(A,B) :- succ(C,A), above_below(B,D), materials(C,D).
# Constants are lowercase identifiers, integers, or quoted tokens; variables
# start with an uppercase letter or underscore.

_BARE_CONST = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_TOKEN_RE = re.compile(
    r"\s*(?::-|[(),.]|'(?:[^'\\]|\\.)*'|-?\d+\.\d+|-?\d+|[A-Za-z_][A-Za-z0-9_]*)"
)


def format_const(value: str | int | float) -> str:
    if isinstance(value, bool):
        raise TypeError("bool is not a term constant")
    if isinstance(value, (int, float)):
        return repr(value)
    if _BARE_CONST.match(value):
        return value
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_term(t: Term) -> str:
    return t.name if isinstance(t, Var) else format_const(t.value)


def format_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(format_term(t) for t in a.args)})"


def format_clause(c: Clause) -> str:
    if not c.body:
        return f"{format_atom(c.head)}."
    return f"{format_atom(c.head)} :- {', '.join(format_atom(b) for b in c.body)}."


def format_program(program: Iterable[Clause]) -> str:
    return "\n".join(format_clause(c) for c in program) + "\n"


class ClauseSyntaxError(ValueError):
    pass


class _Tokens:
    def __init__(self, text: str):
        self.items: list[str] = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            if text[pos] == "%":  # comment to end of line
                nl = text.find("\n", pos)
                pos = len(text) if nl < 0 else nl + 1
                continue
            m = _TOKEN_RE.match(text, pos)
            if not m or not m.group().strip():
                raise ClauseSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
            self.items.append(m.group().strip())
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.items[self.i] if self.i < len(self.items) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ClauseSyntaxError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ClauseSyntaxError(f"expected {tok!r}, got {got!r}")


def _parse_term(tok: str) -> Term:
    if tok.startswith("'"):
        body = tok[1:-1]
        return Const(body.replace("\\'", "'").replace("\\\\", "\\"))
    if re.fullmatch(r"-?\d+", tok):
        return Const(int(tok))
    if re.fullmatch(r"-?\d+\.\d+", tok):
        return Const(float(tok))
    if tok[0].isupper() or tok[0] == "_":
        return Var(tok)
    return Const(tok)


def _parse_atom(tokens: _Tokens) -> Atom:
    name = tokens.next()
    if name.startswith("'") or not re.fullmatch(r"[a-z][a-zA-Z0-9_]*", name):
        raise ClauseSyntaxError(f"bad predicate name {name!r}")
    if tokens.peek() != "(":
        return Atom(name)
    tokens.expect("(")
    args: list[Term] = [_parse_term(tokens.next())]
    while tokens.peek() == ",":
        tokens.next()
        args.append(_parse_term(tokens.next()))
    tokens.expect(")")
    return Atom(name, tuple(args))


def _parse_one_clause(tokens: _Tokens) -> Clause:
    head = _parse_atom(tokens)
    body: list[Atom] = []
    if tokens.peek() == ":-":
        tokens.next()
        body.append(_parse_atom(tokens))
        while tokens.peek() == ",":
            tokens.next()
            body.append(_parse_atom(tokens))
    tokens.expect(".")
    return Clause(head, tuple(body))


def parse_clause(text: str) -> Clause:
    tokens = _Tokens(text)
    clause = _parse_one_clause(tokens)
    if tokens.peek() is not None:
        raise ClauseSyntaxError(f"trailing input: {tokens.peek()!r}")
    return clause


def parse_program(text: str) -> Program:
    tokens = _Tokens(text)
    clauses: list[Clause] = []
    while tokens.peek() is not None:
        clauses.append(_parse_one_clause(tokens))
    return tuple(clauses)


def parse_conjunction(text: str) -> tuple[Atom, ...]:
    """Parse a comma-separated conjunction of atoms (no trailing period)."""
    tokens = _Tokens(text)
    atoms = [_parse_atom(tokens)]
    while tokens.peek() == ",":
        tokens.next()
        atoms.append(_parse_atom(tokens))
    if tokens.peek() is not None:
        raise ClauseSyntaxError(f"trailing input: {tokens.peek()!r}")
    return tuple(atoms)


# ---------------------------------------------------------------------------
# Renaming-invariant signatures, used for program comparison and seeds of the
# pattern canonicalizer.

_VAR_POOL = [chr(ord("A") + i) for i in range(26)]


def canonical_var(i: int) -> Var:
    return Var(_VAR_POOL[i]) if i < 26 else Var(f"V{i}")


def rename_apart(atoms: Sequence[Atom]) -> tuple[Atom, ...]:
    """Rename variables to A, B, C... in first-occurrence order."""
    mapping: dict[Var, Var] = {}
    out = []
    for atom in atoms:
        args = []
        for a in atom.args:
            if isinstance(a, Var):
                if a not in mapping:
                    mapping[a] = canonical_var(len(mapping))
                args.append(mapping[a])
            else:
                args.append(a)
        out.append(Atom(atom.pred, tuple(args)))
    return tuple(out)


def clause_signature(clause: Clause) -> str:
    """Canonical text of a clause, invariant under variable renaming and body order."""

    def sort_key(a: Atom):
        consts = tuple(
            (i, format_const(t.value)) for i, t in enumerate(a.args) if isinstance(t, Const)
        )
        return (a.pred, len(a.args), consts)

    body = sorted(clause.body, key=sort_key)
    groups: list[list[Atom]] = []
    for atom in body:
        if groups and sort_key(groups[-1][0]) == sort_key(atom):
            groups[-1].append(atom)
        else:
            groups.append([atom])
    best: str | None = None
    for perm in itertools.product(*(itertools.permutations(g) for g in groups)):
        ordering = [clause.head] + [a for g in perm for a in g]
        renamed = rename_apart(ordering)
        text = format_atom(renamed[0]) + " :- " + ", ".join(format_atom(a) for a in renamed[1:])
        if best is None or text < best:
            best = text
    assert best is not None
    return best


def program_signature(program: Iterable[Clause]) -> frozenset[str]:
    return frozenset(clause_signature(c) for c in program)
