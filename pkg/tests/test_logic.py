"""Unification, clause syntax, and the depth-bounded prover."""

import random

import pytest

from tdassist.logic import (
    KB,
    Atom,
    ClauseSyntaxError,
    Const,
    FactSet,
    Var,
    clause_signature,
    format_clause,
    format_program,
    parse_clause,
    parse_conjunction,
    parse_program,
    program_signature,
    prove,
    resolve,
    solve_conjunction,
    unify,
)


def atom(text):
    return parse_conjunction(text)[0]


class TestUnify:
    def test_variable_binds_constant(self):
        theta = unify(atom("p(X)"), atom("p(a)"))
        assert theta == {Var("X"): Const("a")}

    def test_constant_clash(self):
        assert unify(atom("p(a)"), atom("p(b)")) is None

    def test_shared_variable_clash(self):
        assert unify(atom("p(X,X)"), atom("p(a,b)")) is None

    def test_shared_variable_agreement(self):
        theta = unify(atom("p(X,X)"), atom("p(a,a)"))
        assert theta == {Var("X"): Const("a")}

    def test_var_to_var(self):
        theta = unify(atom("p(X)"), atom("p(Y)"))
        assert theta is not None
        assert resolve(atom("p(X)"), theta) == resolve(atom("p(Y)"), theta)

    def test_symmetry(self):
        rng = random.Random(11)
        consts = [Const(c) for c in "abc"]
        variables = [Var(v) for v in "XYZ"]
        for _ in range(300):
            args1 = tuple(rng.choice(consts + variables) for _ in range(3))
            args2 = tuple(rng.choice(consts + variables) for _ in range(3))
            a, b = Atom("p", args1), Atom("p", args2)
            ab, ba = unify(a, b), unify(b, a)
            assert (ab is None) == (ba is None)
            if ab is not None:
                assert resolve(a, ab) == resolve(b, ab)


class TestSyntax:
    def test_round_trip(self):
        text = "materials(A,B) :- succ(C,A), above_below(B,D), materials(C,D)."
        assert format_clause(parse_clause(text)) == text

    def test_quoted_tokens(self):
        clause = parse_clause("header(A) :- cell_contains(A,'PARTS LIST').")
        assert clause.body[0].args[1] == Const("PARTS LIST")
        assert parse_clause(format_clause(clause)) == clause

    def test_escaped_quote(self):
        clause = parse_clause(r"p(A) :- cell_contains(A,'it\'s').")
        assert clause.body[0].args[1] == Const("it's")
        assert parse_clause(format_clause(clause)) == clause

    def test_integers_and_floats(self):
        clause = parse_clause("bbox(c1,0,22,60.5,20).")
        assert clause.head.args[1] == Const(0)
        assert clause.head.args[3] == Const(60.5)
        assert parse_clause(format_clause(clause)) == clause

    def test_program_round_trip(self):
        text = "zero(0).\np(X) :- q(X), r(X,'T').\n"
        program = parse_program(text)
        assert format_program(program) == text

    def test_comments_ignored(self):
        program = parse_program("% comment\np(a). % trailing\n")
        assert len(program) == 1

    def test_errors(self):
        with pytest.raises(ClauseSyntaxError):
            parse_clause("p(a)")  # missing period
        with pytest.raises(ClauseSyntaxError):
            parse_clause("P(a).")  # predicate must be lowercase


def chain_kb(n):
    facts = FactSet(Atom("succ", (Const(i), Const(i + 1))) for i in range(n))
    program = parse_program(
        "reach(X,Y) :- succ(X,Y). reach(X,Z) :- succ(X,Y), reach(Y,Z)."
    )
    return KB(program, facts)


class TestProve:
    def test_simple_rule(self):
        kb = KB(parse_program("p(X) :- q(X)."), FactSet([atom("q(a)")]))
        assert prove(kb, atom("p(X)"), 5) == [{Var("X"): Const("a")}]

    def test_recursive_chain(self):
        kb = chain_kb(2)
        answers = prove(kb, atom("reach(0,Z)"), 5)
        assert [a[Var("Z")] for a in answers] == [Const(1), Const(2)]

    def test_depth_monotone_subset(self):
        kb = chain_kb(8)
        goal = atom("reach(0,Z)")
        previous = set()
        for depth in range(1, 12):
            answers = {a[Var("Z")] for a in prove(kb, goal, depth)}
            assert previous <= answers
            previous = answers

    def test_depth_cut_is_silent(self):
        kb = chain_kb(8)
        answers = prove(kb, atom("reach(0,Z)"), 3)
        assert len(answers) == 3  # deeper targets cut without error

    def test_tabled_equals_untabled(self):
        kb = chain_kb(6)
        for depth in (1, 2, 4, 8):
            goal = atom("reach(X,Y)")
            assert prove(kb, goal, depth) == prove(kb, goal, depth, tabled=False)

    def test_nonterminating_left_recursion_is_bounded(self):
        program = parse_program("loop(X) :- loop(X).")
        kb = KB(program, FactSet())
        assert prove(kb, atom("loop(a)"), 30) == []

    def test_conjunction_exclude(self):
        facts = FactSet([atom("q(a)"), atom("q(b)")])
        kb = KB((), facts)
        answers = solve_conjunction(kb, [atom("q(X)")], 3, exclude=atom("q(a)"))
        assert [a[Var("X")] for a in answers] == [Const("b")]

    def test_placeholder_fact_matches_fresh(self):
        facts = FactSet([Atom("cell_contains", (Const("c1"), Var("_P0")))])
        kb = KB((), facts)
        assert solve_conjunction(kb, [atom("cell_contains(c1,'ANY')")], 3)
        answers = solve_conjunction(kb, [atom("cell_contains(c1,T)")], 3)
        assert len(answers) == 1


def _match(pattern, fact, env):
    if pattern.pred != fact.pred or len(pattern.args) != len(fact.args):
        return None
    env = dict(env)
    for p, f in zip(pattern.args, fact.args):
        if isinstance(p, Var):
            if p in env and env[p] != f:
                return None
            env[p] = f
        elif p != f:
            return None
    return env


def _fixpoint(program, facts):
    """Naive bottom-up evaluation, independent of the SLD machinery."""
    known = set(facts)
    changed = True
    while changed:
        changed = False
        for clause in program:
            envs = [{}]
            for lit in clause.body:
                envs = [
                    nxt
                    for env in envs
                    for fact in known
                    if (nxt := _match(lit, fact, env)) is not None
                ]
            for env in envs:
                head = Atom(
                    clause.head.pred,
                    tuple(env.get(a, a) for a in clause.head.args),
                )
                if head.is_ground() and head not in known:
                    known.add(head)
                    changed = True
    return known


class TestFixpointOracle:
    def test_prove_agrees_with_bottom_up(self):
        rng = random.Random(3)
        for trial in range(20):
            n = rng.randint(2, 6)
            facts = [Atom("succ", (Const(i), Const(i + 1))) for i in range(n)]
            for _ in range(rng.randint(0, 3)):
                facts.append(Atom("mark", (Const(rng.randint(0, n)),)))
            program = parse_program(
                """
                reach(X,Y) :- succ(X,Y).
                reach(X,Z) :- succ(X,Y), reach(Y,Z).
                good(X) :- mark(X), reach(X,Y).
                """
            )
            kb = KB(program, FactSet(facts))
            expected = _fixpoint(program, facts)
            for pred, arity in [("reach", 2), ("good", 1)]:
                goal = Atom(pred, tuple(Var(f"V{i}") for i in range(arity)))
                got = {resolve(goal, ans) for ans in prove(kb, goal, 40)}
                want = {a for a in expected if a.pred == pred}
                assert got == want, f"trial {trial}: {pred} mismatch"


class TestSignatures:
    def test_clause_signature_invariant_to_renaming_and_order(self):
        a = parse_clause("materials(A,B) :- succ(C,A), above_below(B,D), materials(C,D).")
        b = parse_clause("materials(Q,R) :- above_below(R,S), materials(T,S), succ(T,Q).")
        assert clause_signature(a) == clause_signature(b)

    def test_different_programs_differ(self):
        a = parse_program("p(X) :- q(X).")
        b = parse_program("p(X) :- r(X).")
        assert program_signature(a) != program_signature(b)
