import itertools
import random

import pytest
from hypothesis import given, strategies as st

from zplus.formula import (And, Const, FALSE, Formula, Implies, Not, Or,
                           ParseError, TRUE, Var, Vocabulary, atoms_of,
                           evaluate, materialization, node_count, parse,
                           to_clauses, to_text)
from zplus.kb import Rule

from conftest import all_worlds, rules_from


def P(text):
    return parse(text, Vocabulary())


class TestParse:
    def test_rule_shaped_implication(self):
        assert P("p & !q => r") == Implies(And(Var("p"), Not(Var("q"))), Var("r"))

    def test_constants(self):
        assert P("true") is TRUE
        assert P("false") is FALSE

    def test_left_associated_conjunction(self):
        got = P("b & f & (p => b)")
        assert got == And(And(Var("b"), Var("f")), Implies(Var("p"), Var("b")))

    def test_precedence(self):
        assert P("a | b & c") == Or(Var("a"), And(Var("b"), Var("c")))
        assert P("!a & b") == And(Not(Var("a")), Var("b"))
        assert P("a => b => c") == Implies(Var("a"), Implies(Var("b"), Var("c")))
        assert P("a & b => c | d") == Implies(And(Var("a"), Var("b")),
                                              Or(Var("c"), Var("d")))

    def test_registers_atoms(self):
        vocab = Vocabulary()
        parse("x & y => zed", vocab)
        assert vocab.names() == ("x", "y", "zed")
        parse("y | w", vocab)
        assert vocab.names() == ("x", "y", "zed", "w")

    def test_comment_and_whitespace(self):
        assert P("  p &\tq  # trailing noise & junk") == And(Var("p"), Var("q"))

    def test_empty_input(self):
        with pytest.raises(ParseError):
            P("")
        with pytest.raises(ParseError):
            P("   # only a comment")

    def test_errors_carry_position(self):
        with pytest.raises(ParseError) as err:
            P("p & $q")
        assert err.value.position == 4
        with pytest.raises(ParseError):
            P("p &")
        with pytest.raises(ParseError):
            P("(p | q")
        with pytest.raises(ParseError):
            P("p q")

    def test_reserved_names_rejected(self):
        with pytest.raises(ValueError):
            Var("true")
        with pytest.raises(ValueError):
            Var("2bad")


_atoms = st.sampled_from(["p", "q", "r", "s"])
_leaves = st.one_of(_atoms.map(Var), st.sampled_from([TRUE, FALSE]))
_formulas = st.recursive(
    _leaves,
    lambda kids: st.one_of(
        kids.map(Not),
        st.tuples(kids, kids).map(lambda t: And(*t)),
        st.tuples(kids, kids).map(lambda t: Or(*t)),
        st.tuples(kids, kids).map(lambda t: Implies(*t)),
    ),
    max_leaves=12,
)


class TestPrinter:
    @given(_formulas)
    def test_print_parse_round_trip(self, f):
        assert parse(to_text(f), Vocabulary()) == f

    def test_minimal_parentheses(self):
        assert to_text(P("b & f & (p => b)")) == "b & f & (p => b)"
        assert to_text(P("!(a & b)")) == "!(a & b)"
        assert to_text(P("(a => b) => c")) == "(a => b) => c"
        assert to_text(P("a => b => c")) == "a => b => c"
        assert to_text(P("(a | b) & c")) == "(a | b) & c"


def _reference_eval(f, world):
    """Independent table-style evaluator used only as a test oracle."""
    table = {
        Const: lambda: f.value,
        Var: lambda: world[f.name],
        Not: lambda: not _reference_eval(f.child, world),
        And: lambda: _reference_eval(f.left, world) & _reference_eval(f.right, world),
        Or: lambda: _reference_eval(f.left, world) | _reference_eval(f.right, world),
        Implies: lambda: (not _reference_eval(f.left, world)) | _reference_eval(f.right, world),
    }
    return table[type(f)]()


class TestEvaluate:
    def test_vacuous_implication(self):
        assert evaluate(P("p => q"), {"p": False, "q": False}) is True

    def test_contradiction(self):
        f = P("p & !p")
        for w in all_worlds(["p"]):
            assert evaluate(f, w) is False

    def test_rule_violation_world(self):
        assert evaluate(P("b & !f"), {"b": True, "f": False, "p": True}) is True

    def test_missing_atom(self):
        with pytest.raises(KeyError):
            evaluate(P("p & q"), {"p": True})

    def test_agrees_with_truth_tables(self):
        rng = random.Random(4021)
        from conftest import random_formula
        atoms = ["p", "q", "r", "s"]
        for _ in range(120):
            f = random_formula(rng, atoms, 3)
            for w in all_worlds(atoms):
                assert evaluate(f, w) == _reference_eval(f, w)


class TestMaterialization:
    def test_empty(self):
        assert materialization([]) is TRUE

    def test_single(self):
        vocab = Vocabulary()
        (r,) = rules_from(["b -> f : 1"], vocab)
        assert materialization([r]) == Implies(Var("b"), Var("f"))

    def test_three_rules(self):
        vocab = Vocabulary()
        rules = rules_from(["b -> f : 1", "p -> b : 2", "p -> !f : 2"], vocab)
        assert to_text(materialization(rules)) == "(b => f) & (p => b) & (p => !f)"


def _clauses_by_name(cf):
    def lit(x):
        name = cf.names[abs(x) - 1]
        return name if x > 0 else "!" + name
    return {frozenset(lit(x) for x in clause) for clause in cf.clauses}


def _clauseset_satisfiable(cf):
    names = list(cf.names)
    for values in itertools.product((False, True), repeat=len(names)):
        world = dict(zip(names, values))
        if all(any(world[cf.names[abs(l) - 1]] == (l > 0) for l in clause)
               for clause in cf.clauses):
            return True
    return False


class TestToClauses:
    def test_already_clausal(self):
        cf = to_clauses(P("(b => f) & (p => b)"))
        assert _clauses_by_name(cf) == {frozenset({"!b", "f"}), frozenset({"!p", "b"})}
        assert cf.horn and cf.direct

    def test_contradiction(self):
        cf = to_clauses(P("p & !p"))
        assert _clauses_by_name(cf) == {frozenset({"p"}), frozenset({"!p"})}
        assert cf.horn

    def test_two_positive_literals_not_horn(self):
        cf = to_clauses(P("(a | b) & (a | c)"))
        assert _clauses_by_name(cf) == {frozenset({"a", "b"}), frozenset({"a", "c"})}
        assert cf.direct and not cf.horn

    def test_constants(self):
        assert to_clauses(TRUE).clauses == ()
        cf = to_clauses(FALSE)
        assert cf.clauses == (frozenset(),)
        assert to_clauses(P("p | !p")).clauses == ()  # tautology dropped

    def test_auxiliary_fallback(self):
        # a wide DNF blows the direct budget and switches to definitions
        terms = " | ".join(f"(x{i} & y{i} & z{i})" for i in range(6))
        cf = to_clauses(P(terms))
        assert not cf.direct and not cf.horn
        assert len(cf.names) > cf.base_count
        assert _clauseset_satisfiable(cf)

    def test_seeded_names_are_respected(self):
        cf = to_clauses(P("q & p"), names=["p", "q", "r"])
        assert cf.names[:3] == ("p", "q", "r")
        assert _clauses_by_name(cf) == {frozenset({"p"}), frozenset({"q"})}

    def test_equisatisfiable_random(self):
        rng = random.Random(90125)
        from conftest import enum_satisfiable, random_formula
        atoms = ["a", "b", "c", "d", "e"]
        for _ in range(150):
            f = random_formula(rng, atoms, 3)
            cf = to_clauses(f)
            assert _clauseset_satisfiable(cf) == enum_satisfiable(f, atoms_of(f))

    def test_forced_auxiliary_equisatisfiable(self):
        rng = random.Random(161803)
        from conftest import enum_satisfiable, random_formula
        atoms = ["a", "b", "c"]
        seen_aux = 0
        for _ in range(150):
            f = random_formula(rng, atoms, 3)
            cf = to_clauses(f, growth_limit=0)  # force the fallback path
            seen_aux += not cf.direct
            assert not cf.horn or cf.direct
            assert _clauseset_satisfiable(cf) == enum_satisfiable(f, atoms_of(f))
        assert seen_aux > 50


def test_node_count():
    assert node_count(P("p")) == 1
    assert node_count(P("p & !q => r")) == 6
