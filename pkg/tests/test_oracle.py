import random

import pytest

from zplus.evidence import EvidenceItem, JPartition
from zplus.formula import And, Not, Vocabulary, evaluate, parse
from zplus.kb import InconsistentRuleSet, is_consistent, kappa_world
from zplus.kb import compile as compile_rules
from zplus.oracle import (WorldTable, models_mask, oracle_compile,
                          oracle_condition, oracle_kappa)
from zplus.rank import INF

from conftest import (all_worlds, penguin_rules, party_rules, random_rule,
                      rules_from)


def _rank_of(table, **assignment):
    return table.ranks[table.index_of(assignment)]


class TestModelsMask:
    def test_matches_pointwise_evaluation(self):
        rng = random.Random(11)
        from conftest import random_formula
        vocab = ("a", "b", "c", "d")
        for _ in range(80):
            f = random_formula(rng, list(vocab), 3)
            mask = models_mask(f, vocab)
            table = WorldTable(vocab, [0] * 16)
            for idx in range(16):
                assert bool(mask >> idx & 1) == evaluate(f, table.assignment(idx))

    def test_unknown_atom(self):
        with pytest.raises(ValueError):
            models_mask(parse("zz", Vocabulary()), ("a",))


class TestOracleCompile:
    def test_penguin_table(self, vocab):
        table = oracle_compile(penguin_rules(vocab))
        assert _rank_of(table, b=True, f=False, p=True) == 2
        assert _rank_of(table, b=True, f=True, p=True) == 5
        assert _rank_of(table, b=False, f=True, p=True) == 5
        assert _rank_of(table, b=False, f=False, p=True) == 5
        assert _rank_of(table, b=True, f=False, p=False) == 2
        for b, f in ((False, False), (False, True), (True, True)):
            assert _rank_of(table, b=b, f=f, p=False) == 0

    def test_party_table(self, vocab):
        table = oracle_compile(party_rules(vocab))
        assert _rank_of(table, M=True, B=True) == 5
        for m, b in ((True, False), (False, True), (False, False)):
            assert _rank_of(table, M=m, B=b) == 0

    def test_empty_rules(self):
        table = oracle_compile([], vocabulary=("x", "y"))
        assert table.ranks == [0, 0, 0, 0]

    def test_vocabulary_cap(self, vocab):
        with pytest.raises(ValueError):
            oracle_compile(penguin_rules(vocab), max_atoms=2)

    def test_inconsistent_pair(self, vocab):
        rules = rules_from(["a -> b : 1", "a -> !b : 1"], vocab)
        with pytest.raises(InconsistentRuleSet):
            oracle_compile(rules)

    def test_rule_without_verifying_world(self, vocab):
        rules = rules_from(["a -> b & !b : 0"], vocab)
        with pytest.raises(InconsistentRuleSet):
            oracle_compile(rules)

    def test_admissibility_audit(self):
        rng = random.Random(21)
        from conftest import random_consistent_kb
        for _ in range(20):
            rules = random_consistent_kb(rng, n_atoms=4, n_rules=5)
            table = oracle_compile(rules)
            for r in rules:
                verifying = oracle_kappa(table, And(r.antecedent, r.consequent))
                violating = oracle_kappa(table, And(r.antecedent, Not(r.consequent)))
                assert verifying + r.delta < violating

    def test_minimality_audit(self, vocab):
        # lowering any positive rank by one breaks admissibility somewhere
        rules = penguin_rules(vocab)
        table = oracle_compile(rules)
        for idx, rank in enumerate(table.ranks):
            if rank == 0:
                continue
            lowered = WorldTable(table.vocabulary, list(table.ranks))
            lowered.ranks[idx] = rank - 1
            broken = any(
                oracle_kappa(lowered, And(r.antecedent, r.consequent)) + r.delta
                >= oracle_kappa(lowered, And(r.antecedent, Not(r.consequent)))
                for r in rules)
            assert broken, f"world {idx} could be lowered"

    def test_consistency_agreement(self):
        rng = random.Random(22)
        for _ in range(120):
            atoms = ["a", "b", "c"][: rng.randint(2, 3)]
            rules = [random_rule(rng, atoms, i) for i in range(rng.randint(1, 5))]
            engine = is_consistent(rules)
            try:
                oracle_compile(rules)
                oracle_verdict = True
            except InconsistentRuleSet:
                oracle_verdict = False
            assert engine == oracle_verdict

    def test_engine_equivalence(self, vocab):
        rules = penguin_rules(vocab)
        kb = compile_rules(rules)
        table = oracle_compile(rules, vocabulary=kb.vocabulary)
        for w in all_worlds(kb.vocabulary):
            assert kappa_world(kb, w) == table.ranks[table.index_of(w)]


class TestOracleCondition:
    def test_party_j_update(self, vocab):
        table = oracle_compile(party_rules(vocab))
        updated = oracle_condition(table, EvidenceItem("J", parse("M", vocab), 3))
        assert _rank_of(updated, M=False, B=True) == 3
        assert _rank_of(updated, M=False, B=False) == 3
        assert _rank_of(updated, M=True, B=False) == 0
        assert _rank_of(updated, M=True, B=True) == 5

    def test_party_j_then_l(self, vocab):
        table = oracle_compile(party_rules(vocab))
        after_j = oracle_condition(table, EvidenceItem("J", parse("M", vocab), 3))
        after_l = oracle_condition(after_j, EvidenceItem("L", parse("B", vocab), 3))
        assert _rank_of(after_l, M=True, B=True) == 2
        assert _rank_of(after_l, M=False, B=True) == 0
        assert _rank_of(after_l, M=True, B=False) == 0
        assert _rank_of(after_l, M=False, B=False) == 3

    def test_l_level_zero_is_identity(self, vocab):
        table = oracle_compile(penguin_rules(vocab))
        updated = oracle_condition(table, EvidenceItem("L", parse("p", vocab), 0))
        assert updated.ranks == table.ranks

    def test_infinite_level_is_plain_conditioning(self, vocab):
        table = oracle_compile(party_rules(vocab))
        for mode in ("J", "L"):
            updated = oracle_condition(table, EvidenceItem(mode, parse("M", vocab), INF))
            assert _rank_of(updated, M=True, B=True) == 5
            assert _rank_of(updated, M=True, B=False) == 0
            assert _rank_of(updated, M=False, B=True) == INF
            assert _rank_of(updated, M=False, B=False) == INF

    def test_partition(self, vocab):
        table = oracle_compile(party_rules(vocab))
        cells = (
            (parse("M & B", vocab), 0),
            (parse("M & !B", vocab), 1),
            (parse("!M & B", vocab), 1),
            (parse("!M & !B", vocab), 2),
        )
        updated = oracle_condition(table, JPartition(cells))
        assert _rank_of(updated, M=True, B=True) == 0
        assert _rank_of(updated, M=True, B=False) == 1
        assert _rank_of(updated, M=False, B=True) == 1
        assert _rank_of(updated, M=False, B=False) == 2

    def test_partition_must_cover(self, vocab):
        table = oracle_compile(party_rules(vocab))
        with pytest.raises(ValueError):
            oracle_condition(table, JPartition(((parse("M", vocab), 0),)))

    def test_tautological_evidence_rejected(self, vocab):
        table = oracle_compile(party_rules(vocab))
        with pytest.raises(ValueError):
            oracle_condition(table, EvidenceItem("J", parse("M | !M", vocab), 2))

    def test_minimum_stays_zero(self, vocab):
        rng = random.Random(23)
        from conftest import random_formula
        table = oracle_compile(penguin_rules(vocab))
        atoms = list(table.vocabulary)
        for _ in range(40):
            f = random_formula(rng, atoms, 2)
            full = models_mask(parse("true", vocab), table.vocabulary)
            mask = models_mask(f, table.vocabulary)
            if mask == 0 or mask == full:
                continue
            mode = rng.choice(["J", "L"])
            table = oracle_condition(table, EvidenceItem(mode, f, rng.randint(0, 4)))
            assert min(table.ranks) == 0


class TestOracleKappa:
    def test_penguin(self, vocab):
        table = oracle_compile(penguin_rules(vocab))
        assert oracle_kappa(table, parse("p & !f", vocab)) == 2

    def test_truth_is_normal(self, vocab):
        table = oracle_compile(penguin_rules(vocab))
        assert oracle_kappa(table, parse("true", vocab)) == 0

    def test_contradiction(self, vocab):
        table = oracle_compile(penguin_rules(vocab))
        assert oracle_kappa(table, parse("b & !b", vocab)) == INF
