"""Belief states under soft evidence.

A belief state is a compiled rule base plus an ordered chain of evidence
records.  J-records fix the posterior disbelief of the supported formula's
negation at an absolute level; L-records shift the disbelief gap between the
formula and its negation by a fixed amount.  Ranks of the updated state are
evaluated lazily and recursively (there is no compact compiled encoding for
an updated ranking), with memoization: a chain of length k touches at most
2^k base-ranking formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from .formula import And, Formula, Not, Or
from .kb import CompiledKB
from .rank import INF, QueryResult, Rank, _verdict, kappa
from . import sat

__all__ = ["EvidenceItem", "JPartition", "BeliefState", "EvidenceError",
           "observe", "observe_j_partition", "state_kappa", "believes"]


class EvidenceError(ValueError):
    """Invalid evidence: wrong level, degenerate formula, or bad partition."""


def _check_level(level: Rank) -> None:
    if level == INF:
        return
    if not isinstance(level, int) or isinstance(level, bool) or level < 0:
        raise EvidenceError(f"evidence level must be a non-negative integer or inf, got {level!r}")


@dataclass(frozen=True, slots=True)
class EvidenceItem:
    """One soft-evidence report; mode 'J' or 'L'.  Level inf degrades both
    modes to ordinary conditioning on the formula."""

    mode: str
    formula: Formula
    level: Rank

    def __post_init__(self):
        if self.mode not in ("J", "L"):
            raise EvidenceError(f"evidence mode must be 'J' or 'L', got {self.mode!r}")
        _check_level(self.level)


@dataclass(frozen=True, slots=True)
class JPartition:
    """Simultaneous J-conditioning on the cells of a partition; every world
    is ranked relative to its own cell plus the cell's level."""

    cells: tuple[tuple[Formula, Rank], ...]


ChainEntry = Union[EvidenceItem, JPartition]


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Immutable; observing returns a new state sharing the base KB."""

    kb: CompiledKB
    chain: tuple[ChainEntry, ...] = ()
    _memo: dict = field(default_factory=dict, repr=False)


def observe(state: BeliefState, item: EvidenceItem,
            counter: sat.SatCounter | None = None) -> BeliefState:
    """Append one evidence record; no eager recomputation happens.

    The formula must be satisfiable, and for finite levels its negation must
    be satisfiable too.
    """
    if not sat.is_satisfiable(item.formula, counter):
        raise EvidenceError("evidence formula is contradictory")
    if item.level != INF and not sat.is_satisfiable(Not(item.formula), counter):
        raise EvidenceError("evidence formula is tautological (finite level)")
    return BeliefState(state.kb, state.chain + (item,))


def observe_j_partition(state: BeliefState,
                        cells: Iterable[tuple[Formula, Rank]],
                        counter: sat.SatCounter | None = None) -> BeliefState:
    """Simultaneous J-conditioning on mutually exclusive, jointly exhaustive
    cells; at least one cell must carry level 0."""
    cells = tuple((f, lvl) for f, lvl in cells)
    if not cells:
        raise EvidenceError("empty partition")
    for _, lvl in cells:
        _check_level(lvl)
    if min(lvl for _, lvl in cells) != 0:
        raise EvidenceError("partition needs a zero-level cell")
    for f, _ in cells:
        if not sat.is_satisfiable(f, counter):
            raise EvidenceError(f"unsatisfiable partition cell: {f}")
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if sat.is_satisfiable(And(cells[i][0], cells[j][0]), counter):
                raise EvidenceError(
                    f"partition cells overlap: {cells[i][0]} and {cells[j][0]}")
    disjunction: Formula | None = None
    for f, _ in cells:
        disjunction = f if disjunction is None else Or(disjunction, f)
    if sat.is_satisfiable(Not(disjunction), counter):
        raise EvidenceError("partition cells are not exhaustive")
    return BeliefState(state.kb, state.chain + (JPartition(cells),))


def _branch(num: Rank, den: Rank, shift: Rank) -> Rank:
    if den == INF or num == INF:
        return INF
    return num - den + shift


def _kappa_at(state: BeliefState, depth: int, f: Formula,
              counter: sat.SatCounter | None) -> Rank:
    if depth == 0:
        return kappa(state.kb, f, counter)
    key = (depth, f)
    memo = state._memo
    cached = memo.get(key)
    if cached is not None:
        return cached
    entry = state.chain[depth - 1]
    if isinstance(entry, JPartition):
        val = min(
            _branch(_kappa_at(state, depth - 1, And(f, cell), counter),
                    _kappa_at(state, depth - 1, cell, counter), lvl)
            for cell, lvl in entry.cells)
    else:
        phi = entry.formula
        on_phi = _kappa_at(state, depth - 1, And(f, phi), counter)
        k_phi = _kappa_at(state, depth - 1, phi, counter)
        on_neg = _kappa_at(state, depth - 1, And(f, Not(phi)), counter)
        k_neg = _kappa_at(state, depth - 1, Not(phi), counter)
        if entry.mode == "J":
            s_phi: Rank = 0
            s_neg: Rank = entry.level
        else:
            s_phi = max(0, k_phi - k_neg - entry.level)
            s_neg = max(0, k_neg - k_phi + entry.level)
        val = min(_branch(on_phi, k_phi, s_phi), _branch(on_neg, k_neg, s_neg))
    memo[key] = val
    return val


def state_kappa(state: BeliefState, psi: Formula,
                counter: sat.SatCounter | None = None) -> Rank:
    """Rank of ``psi`` in the updated ranking induced by the evidence chain."""
    return _kappa_at(state, len(state.chain), psi, counter)


def believes(state: BeliefState, psi: Formula,
             counter: sat.SatCounter | None = None) -> QueryResult:
    """Graded belief in ``psi`` under the current evidence chain."""
    pro = state_kappa(state, psi, counter)
    con = state_kappa(state, Not(psi), counter)
    strength = con - pro
    return QueryResult(strength, _verdict(strength), pro, con)
