"""Propositional satisfiability with an instrumented call counter.

Horn clause sets are decided by unit propagation alone (linear in the number
of literal occurrences); everything else goes through backtracking search
with unit propagation.  Decision variables follow fixed index order so runs
are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .formula import Formula, to_clauses

__all__ = ["SatCounter", "is_satisfiable", "find_model", "solve_clauses",
           "satisfiable_parts"]


@dataclass
class SatCounter:
    """Counts satisfiability decisions; ``horn_path_calls`` counts the subset
    that was routed through the Horn unit-propagation procedure."""

    total_calls: int = 0
    horn_path_calls: int = 0

    def record(self, horn: bool) -> None:
        self.total_calls += 1
        if horn:
            self.horn_path_calls += 1


class _Engine:
    """Counter-based unit propagation over a fixed clause list, with a trail
    for backtracking.  Variables are arbitrary positive ints (sparse is fine)."""

    __slots__ = ("clauses", "occur", "n_open", "n_sat", "assign", "trail")

    def __init__(self, clauses: Sequence[Iterable[int]]):
        self.clauses = [tuple(c) for c in clauses]
        self.occur: dict[int, list[int]] = {}
        self.n_open = [0] * len(self.clauses)
        self.n_sat = [0] * len(self.clauses)
        self.assign: dict[int, bool] = {}
        self.trail: list[int] = []
        for cid, clause in enumerate(self.clauses):
            self.n_open[cid] = len(clause)
            for lit in clause:
                self.occur.setdefault(lit, []).append(cid)

    def _set(self, lit: int) -> bool:
        """Assign ``lit`` true; returns False on conflict."""
        var = abs(lit)
        val = lit > 0
        cur = self.assign.get(var)
        if cur is not None:
            return cur == val
        self.assign[var] = val
        self.trail.append(var)
        for cid in self.occur.get(lit, ()):
            self.n_sat[cid] += 1
        ok = True
        for cid in self.occur.get(-lit, ()):
            self.n_open[cid] -= 1
            if self.n_sat[cid] == 0 and self.n_open[cid] == 0:
                ok = False
        return ok

    def propagate(self, seeds: Iterable[int]) -> bool:
        """Assign seed literals and run unit propagation to fixpoint."""
        queue = list(seeds)
        while queue:
            lit = queue.pop()
            var = abs(lit)
            cur = self.assign.get(var)
            if cur is not None:
                if cur != (lit > 0):
                    return False
                continue
            if not self._set(lit):
                return False
            for cid in self.occur.get(-lit, ()):
                if self.n_sat[cid] == 0 and self.n_open[cid] == 1:
                    queue.append(self._open_literal(cid))
        return True

    def _open_literal(self, cid: int) -> int:
        for lit in self.clauses[cid]:
            if abs(lit) not in self.assign:
                return lit
        raise AssertionError("no open literal in unit clause")

    def initial_units(self) -> list[int] | None:
        units = []
        for cid, clause in enumerate(self.clauses):
            if not clause:
                return None
            if len(clause) == 1:
                units.append(clause[0])
        return units

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            var = self.trail.pop()
            val = self.assign.pop(var)
            lit = var if val else -var
            for cid in self.occur.get(lit, ()):
                self.n_sat[cid] -= 1
            for cid in self.occur.get(-lit, ()):
                self.n_open[cid] += 1

    def all_satisfied(self) -> bool:
        return all(n > 0 for n in self.n_sat)


def _horn_decide(engine: _Engine) -> dict[int, bool] | None:
    """Horn clause sets are satisfiable iff unit propagation is conflict-free;
    the propagated assignment extended with all-false is then a model."""
    units = engine.initial_units()
    if units is None or not engine.propagate(units):
        return None
    return dict(engine.assign)


def _dpll(engine: _Engine, variables: Sequence[int]) -> dict[int, bool] | None:
    units = engine.initial_units()
    if units is None or not engine.propagate(units):
        return None
    order = sorted(set(variables))
    stack: list[tuple[int, int, bool]] = []  # (trail mark, var, tried_second)

    def next_var() -> int | None:
        for v in order:
            if v not in engine.assign:
                return v
        return None

    while True:
        var = next_var()
        if var is None or engine.all_satisfied():
            return dict(engine.assign)
        mark = len(engine.trail)
        stack.append((mark, var, False))
        ok = engine.propagate([-var])  # try false first
        while not ok:
            # backtrack to the deepest decision with an untried branch
            while stack and stack[-1][2]:
                engine.undo_to(stack[-1][0])
                stack.pop()
            if not stack:
                return None
            mark, var, _ = stack[-1]
            engine.undo_to(mark)
            stack[-1] = (mark, var, True)
            ok = engine.propagate([var])


def solve_clauses(clauses: Sequence[Iterable[int]], horn: bool,
                  counter: SatCounter | None = None) -> dict[int, bool] | None:
    """Decide one clause set; counts as a single satisfiability call.

    Returns a (possibly partial) satisfying assignment or None; unassigned
    variables may take either value, false by convention.
    """
    if counter is not None:
        counter.record(horn)
    engine = _Engine(clauses)
    if horn:
        result = _horn_decide(engine)
    else:
        variables = [abs(lit) for c in engine.clauses for lit in c]
        result = _dpll(engine, variables)
    return result


def satisfiable_parts(parts: Iterable[tuple[Sequence[frozenset[int]], bool]],
                      counter: SatCounter | None = None) -> bool:
    """Decide the conjunction of pre-converted clause groups in one call.

    Each part is (clauses, horn-flag); groups must use consistent variable
    numbering for shared atoms and disjoint numbering for auxiliaries.
    """
    clauses: list[frozenset[int]] = []
    horn = True
    for cl, h in parts:
        clauses.extend(cl)
        horn = horn and h
    return solve_clauses(clauses, horn, counter) is not None


def is_satisfiable(f: Formula, counter: SatCounter | None = None) -> bool:
    """True iff some world over ``f``'s vocabulary satisfies ``f``.

    Exactly one counted call; routed through the Horn procedure when the
    direct clausal form is Horn.
    """
    cf = to_clauses(f)
    return solve_clauses(cf.clauses, cf.horn, counter) is not None


def find_model(f: Formula) -> Mapping[str, bool] | None:
    """A satisfying world over ``f``'s vocabulary, or None."""
    cf = to_clauses(f)
    sol = solve_clauses(cf.clauses, cf.horn, None)
    if sol is None:
        return None
    return {name: sol.get(i + 1, False)
            for i, name in enumerate(cf.names[: cf.base_count])}
