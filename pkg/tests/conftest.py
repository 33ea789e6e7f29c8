"""Shared builders: canonical knowledge bases, world enumeration, and
seeded random generators for formulas, rules, and consistent rule sets."""

from __future__ import annotations

import itertools
import random

import pytest

from zplus.formula import (And, Formula, Implies, Not, Or, Var, Vocabulary,
                           conjoin, evaluate, parse)
from zplus.kb import Rule, is_consistent, parse_rule


def wff(text: str, vocab: Vocabulary) -> Formula:
    return parse(text, vocab)


def rules_from(lines: list[str], vocab: Vocabulary) -> list[Rule]:
    return [parse_rule(line, vocab, index=i) for i, line in enumerate(lines)]


def penguin_rules(vocab: Vocabulary) -> list[Rule]:
    return rules_from(["b -> f : 1", "p -> b : 2", "p -> !f : 2"], vocab)


def party_rules(vocab: Vocabulary) -> list[Rule]:
    return rules_from(["M -> !B : 4"], vocab)


@pytest.fixture
def vocab() -> Vocabulary:
    return Vocabulary()


@pytest.fixture
def penguin(vocab):
    from zplus.kb import compile as compile_rules
    return compile_rules(penguin_rules(vocab)), vocab


@pytest.fixture
def party(vocab):
    from zplus.kb import compile as compile_rules
    return compile_rules(party_rules(vocab)), vocab


def all_worlds(atoms) -> list[dict[str, bool]]:
    atoms = list(atoms)
    return [dict(zip(atoms, values))
            for values in itertools.product((False, True), repeat=len(atoms))]


def world_formula(world: dict[str, bool]) -> Formula:
    return conjoin(Var(a) if v else Not(Var(a)) for a, v in world.items())


def enum_satisfiable(f: Formula, atoms) -> bool:
    return any(evaluate(f, w) for w in all_worlds(atoms))


# ---------------------------------------------------------------------------
# Seeded random generation

def random_formula(rng: random.Random, atoms, max_depth: int = 3) -> Formula:
    if max_depth == 0 or rng.random() < 0.35:
        return Var(rng.choice(atoms))
    roll = rng.random()
    if roll < 0.25:
        return Not(random_formula(rng, atoms, max_depth - 1))
    a = random_formula(rng, atoms, max_depth - 1)
    b = random_formula(rng, atoms, max_depth - 1)
    if roll < 0.55:
        return And(a, b)
    if roll < 0.85:
        return Or(a, b)
    return Implies(a, b)


def random_rule(rng: random.Random, atoms, index: int,
                max_delta: int = 3) -> Rule:
    """A rule whose antecedent-and-consequent has at least one world, so the
    rule is not unsatisfiable as a constraint on its own."""
    while True:
        ant = random_formula(rng, atoms, 2)
        cons = random_formula(rng, atoms, 2)
        if enum_satisfiable(And(ant, cons), atoms):
            return Rule(ant, cons, rng.randint(0, max_delta), index)


def random_consistent_kb(rng: random.Random, n_atoms: int = 4,
                         n_rules: int = 5, max_delta: int = 3) -> list[Rule]:
    atoms = [f"a{i}" for i in range(n_atoms)]
    while True:
        rules = [random_rule(rng, atoms, i, max_delta) for i in range(n_rules)]
        if is_consistent(rules):
            return rules


def chain_rules(n: int, vocab: Vocabulary) -> list[Rule]:
    """An exception tower: each layer is a subclass of the one below and
    flips the chain's distinguished consequence, forcing priorities upward.
    All material counterparts and toleration formulas stay in Horn form."""
    lines = ["c0 -> w : 1"]
    layer = 1
    while len(lines) < n:
        lines.append(f"c{layer} -> c{layer - 1} : {1 + layer % 3}")
        if len(lines) < n:
            target = "w" if layer % 2 == 0 else "!w"
            lines.append(f"c{layer} -> {target} : {1 + (layer + 1) % 3}")
        layer += 1
    return rules_from(lines, vocab)


def horn_kb(n: int, vocab: Vocabulary, tower: int = 81) -> list[Rule]:
    """A Horn-form rule set: an exception tower plus independent base rules."""
    lines: list[str] = []
    layer = 1
    lines.append("c0 -> w : 1")
    while len(lines) < tower:
        lines.append(f"c{layer} -> c{layer - 1} : 1")
        if len(lines) < tower:
            target = "w" if layer % 2 == 0 else "!w"
            lines.append(f"c{layer} -> {target} : 2")
        layer += 1
    i = 0
    while len(lines) < n:
        lines.append(f"s{i} -> t{i} : {i % 4}")
        i += 1
    return rules_from(lines, vocab)
