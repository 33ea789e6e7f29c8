"""Ranks of formulas over a compiled rule base, computed by binary search on
the sorted priority list, and graded entailment queries.

A rank is a non-negative integer or ``math.inf`` (the rank of an
unsatisfiable formula).  Plain ``int`` arithmetic keeps finite ranks exact;
``inf`` propagates through min/max/addition the way extended naturals should.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

from .formula import And, Formula, Not, materialization, to_clauses
from . import sat

if TYPE_CHECKING:
    from .kb import CompiledKB

__all__ = ["INF", "Rank", "QueryResult", "ContextUnsatisfiable",
           "kappa", "conditional_kappa", "query"]

INF = math.inf
Rank = int | float

#: When enabled, every cut search exhaustively re-checks that suffix
#: satisfiability is monotone nondecreasing in the cut point (slow; testing only).
DEBUG_CUT_MONOTONICITY = False


class ContextUnsatisfiable(ValueError):
    """Raised when a query or conditional rank is taken against an
    unsatisfiable context formula."""


@dataclass(frozen=True)
class QueryResult:
    """Outcome of a graded entailment query.

    ``strength`` is kappa_con - kappa_pro; the target follows from the
    context with strength d exactly when d < strength.
    """

    strength: Rank
    verdict: str
    kappa_pro: Rank
    kappa_con: Rank


def _verdict(strength: Rank) -> str:
    if strength >= 1:
        return "believed"
    if strength <= -1:
        return "denied"
    return "undecided"


def _min_satisfiable_cut(sat_at: Callable[[int], bool], n: int) -> int:
    """Least cut c in 1..n+1 whose rule suffix is jointly satisfiable with
    the target; assumes cut n+1 (empty suffix) is satisfiable.
    """
    if sat_at(1):
        return 1
    lo, hi = 2, n + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if sat_at(mid):
            hi = mid
        else:
            lo = mid + 1
    if DEBUG_CUT_MONOTONICITY:
        flags = [sat_at(c) for c in range(1, n + 2)]
        assert flags == sorted(flags), "cut satisfiability is not monotone"
        assert flags[lo - 1] and (lo == 1 or not flags[lo - 2])
    return lo


def kappa(kb: "CompiledKB", f: Formula,
          counter: sat.SatCounter | None = None) -> Rank:
    """Rank of ``f``: the rank of its most normal model, inf if unsatisfiable.

    Uses at most ceil(log2 n) + 2 satisfiability calls for n rules.
    """
    names = list(kb.vocabulary)
    cf = to_clauses(f, names=names)
    f_part = (cf.clauses, cf.horn)
    if not sat.satisfiable_parts([f_part], counter):
        return INF
    order = kb.order
    n = len(order)
    if n == 0:
        return 0

    if kb.fast_path:
        parts = kb.mat_parts

        def sat_at(c: int) -> bool:
            return sat.satisfiable_parts([f_part, *parts[c - 1:]], counter)
    else:
        def sat_at(c: int) -> bool:
            g = And(f, materialization(order[c - 1:]))
            return sat.is_satisfiable(g, counter)

    c = _min_satisfiable_cut(sat_at, n)
    return 0 if c == 1 else kb.z_plus[order[c - 2]] + 1


def conditional_kappa(kb: "CompiledKB", psi: Formula, phi: Formula,
                      counter: sat.SatCounter | None = None) -> Rank:
    """kappa(psi and phi) - kappa(phi); errors when phi is unsatisfiable."""
    k_phi = kappa(kb, phi, counter)
    if k_phi == INF:
        raise ContextUnsatisfiable("conditioning formula is unsatisfiable")
    return kappa(kb, And(psi, phi), counter) - k_phi


def query(kb: "CompiledKB", phi: Formula, sigma: Formula,
          counter: sat.SatCounter | None = None) -> QueryResult:
    """Graded entailment of ``sigma`` in the context ``phi``."""
    pro = kappa(kb, And(phi, sigma), counter)
    con = kappa(kb, And(phi, Not(sigma)), counter)
    if pro == INF and con == INF:
        raise ContextUnsatisfiable("query context is unsatisfiable")
    strength = con - pro
    return QueryResult(strength, _verdict(strength), pro, con)
