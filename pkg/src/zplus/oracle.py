"""Brute-force reference engine: exhaustive world tables, least-fixpoint
computation of the minimal admissible ranking, and worldwise conditioning.

Deliberately a different algorithm from the compiled engine so the two can
be tested against each other; a test instrument, not a reasoning engine.
Worlds are indexed by bitmask (bit j = truth of ``vocabulary[j]``) and
formula extensions are computed as bitmask integers over all 2^n worlds at
once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .formula import And, Const, Formula, Implies, Not, Or, Var, atoms_of
from .kb import InconsistentRuleSet, Rule
from .evidence import EvidenceItem, JPartition
from .rank import INF, Rank

__all__ = ["DEFAULT_MAX_ATOMS", "WorldTable", "oracle_compile",
           "oracle_condition", "oracle_kappa", "models_mask"]

DEFAULT_MAX_ATOMS = 20


def _atom_mask(j: int, n: int) -> int:
    """Bitmask of the world indices in which atom ``j`` is true."""
    h = 1 << j
    period = h << 1
    block = ((1 << h) - 1) << h
    count = 1 << (n - j - 1)
    rep = ((1 << (period * count)) - 1) // ((1 << period) - 1)
    return block * rep


def models_mask(f: Formula, vocabulary: tuple[str, ...]) -> int:
    """Bitmask of the worlds over ``vocabulary`` satisfying ``f``."""
    n = len(vocabulary)
    full = (1 << (1 << n)) - 1
    index = {a: j for j, a in enumerate(vocabulary)}

    def rec(node: Formula) -> int:
        if isinstance(node, Const):
            return full if node.value else 0
        if isinstance(node, Var):
            try:
                return _atom_mask(index[node.name], n)
            except KeyError:
                raise ValueError(f"atom {node.name!r} not in table vocabulary") from None
        if isinstance(node, Not):
            return full ^ rec(node.child)
        if isinstance(node, And):
            return rec(node.left) & rec(node.right)
        if isinstance(node, Or):
            return rec(node.left) | rec(node.right)
        if isinstance(node, Implies):
            return (full ^ rec(node.left)) | rec(node.right)
        raise TypeError(f"not a formula: {node!r}")

    return rec(f)


def _bit_indices(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass
class WorldTable:
    """Ranks for every world over a small vocabulary; min rank is 0."""

    vocabulary: tuple[str, ...]
    ranks: list[Rank]

    def assignment(self, idx: int) -> dict[str, bool]:
        return {a: bool((idx >> j) & 1) for j, a in enumerate(self.vocabulary)}

    def index_of(self, world: Mapping[str, bool]) -> int:
        idx = 0
        for j, a in enumerate(self.vocabulary):
            if world[a]:
                idx |= 1 << j
        return idx

    def __len__(self) -> int:
        return len(self.ranks)


def _vocabulary_for(rules: Iterable[Rule],
                    vocabulary: Iterable[str] | None) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    if vocabulary is not None:
        for a in vocabulary:
            seen.setdefault(a)
    for r in rules:
        for a in atoms_of(r.antecedent) + atoms_of(r.consequent):
            seen.setdefault(a)
    return tuple(seen)


def oracle_compile(rules: Iterable[Rule],
                   vocabulary: Iterable[str] | None = None,
                   max_atoms: int = DEFAULT_MAX_ATOMS) -> WorldTable:
    """Pointwise-least admissible ranking by monotone fixpoint iteration.

    Every world starts at 0; each pass raises every rule-violating world to
    one above (the minimum rank among the rule's verifying worlds) plus the
    rule's strength.  A rule with no verifying world is unsatisfiable as a
    constraint, and a table still changing after sum(delta+1)+1 passes cannot
    converge; both signal inconsistency.
    """
    rules = tuple(rules)
    vocab = _vocabulary_for(rules, vocabulary)
    n = len(vocab)
    if n > max_atoms:
        raise ValueError(f"vocabulary of {n} atoms exceeds the cap of {max_atoms}")

    verify_sets: list[list[int]] = []
    violate_sets: list[list[int]] = []
    for r in rules:
        verify = models_mask(And(r.antecedent, r.consequent), vocab)
        violate = models_mask(And(r.antecedent, Not(r.consequent)), vocab)
        if verify == 0:
            raise InconsistentRuleSet([r])
        verify_sets.append(_bit_indices(verify))
        violate_sets.append(_bit_indices(violate))

    ranks: list[Rank] = [0] * (1 << n)
    cap = sum(r.delta + 1 for r in rules) + 1
    for _ in range(cap):
        changed = False
        for i, r in enumerate(rules):
            need = min(ranks[w] for w in verify_sets[i]) + r.delta + 1
            for w in violate_sets[i]:
                if ranks[w] < need:
                    ranks[w] = need
                    changed = True
        if not changed:
            break
    else:
        raise InconsistentRuleSet(rules)
    return WorldTable(vocab, ranks)


def _side_min(table: WorldTable, worlds: list[int]) -> Rank:
    return min((table.ranks[w] for w in worlds), default=INF)


def _normalized(ranks: list[Rank]) -> list[Rank]:
    low = min(ranks)
    if low == 0 or low == INF:
        return ranks
    return [r if r == INF else r - low for r in ranks]


def oracle_condition(table: WorldTable,
                     item: EvidenceItem | JPartition) -> WorldTable:
    """Worldwise soft-evidence update; J fixes the posterior disbelief of the
    formula's negation, L shifts the disbelief gap by a fixed amount."""
    n = len(table.vocabulary)
    full = (1 << (1 << n)) - 1

    if isinstance(item, JPartition):
        shift: list[Rank] = [INF] * len(table.ranks)
        covered = 0
        for cell, level in item.cells:
            mask = models_mask(cell, table.vocabulary)
            if mask == 0:
                raise ValueError("partition cell has no world")
            if mask & covered:
                raise ValueError("partition cells overlap")
            covered |= mask
            worlds = _bit_indices(mask)
            base = _side_min(table, worlds)
            for w in worlds:
                shift[w] = _apply(table.ranks[w], base, level)
        if covered != full:
            raise ValueError("partition does not cover all worlds")
        return WorldTable(table.vocabulary, _normalized(shift))

    phi_mask = models_mask(item.formula, table.vocabulary)
    neg_mask = full ^ phi_mask
    if phi_mask == 0:
        raise ValueError("evidence formula has no world")
    if item.level != INF and neg_mask == 0:
        raise ValueError("evidence formula is tautological")
    pos_worlds = _bit_indices(phi_mask)
    neg_worlds = _bit_indices(neg_mask)
    k_pos = _side_min(table, pos_worlds)
    k_neg = _side_min(table, neg_worlds)
    if item.mode == "J":
        s_pos: Rank = 0
        s_neg: Rank = item.level
    else:
        s_pos = max(0, k_pos - k_neg - item.level)
        s_neg = max(0, k_neg - k_pos + item.level)
    ranks: list[Rank] = list(table.ranks)
    for w in pos_worlds:
        ranks[w] = _apply(table.ranks[w], k_pos, s_pos)
    for w in neg_worlds:
        ranks[w] = _apply(table.ranks[w], k_neg, s_neg)
    return WorldTable(table.vocabulary, _normalized(ranks))


def _apply(rank: Rank, side_min: Rank, shift: Rank) -> Rank:
    if rank == INF or side_min == INF:
        return INF
    return rank - side_min + shift


def oracle_kappa(table: WorldTable, f: Formula) -> Rank:
    """Minimum rank over satisfying worlds; inf when there are none."""
    mask = models_mask(f, table.vocabulary)
    if mask == 0:
        return INF
    return min(table.ranks[w] for w in _bit_indices(mask))
