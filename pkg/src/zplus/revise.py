"""Knowledge-base revision: rule addition with recompilation, Ramsey-test
acceptance of conditionals, nested conditionals, entrenchment listing, and
belief-set extraction.

All operations are pure over immutable inputs; adding a rule never mutates
the original KB.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .formula import Formula
from .kb import CompiledKB, InconsistentRuleSet, Rule
from . import kb as kb_mod
from .rank import Rank, query
from .evidence import BeliefState, believes
from . import sat

__all__ = ["RevisionOutcome", "add_rule", "accepts_conditional",
           "nested_conditional", "entrenchment", "belief_set"]

ACCEPTED = "accepted"
INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class RevisionOutcome:
    """Result of adding a rule; ``new_kb`` is present only when accepted."""

    status: str
    new_kb: CompiledKB | None = None


def add_rule(compiled: CompiledKB, rule: Rule,
             counter: sat.SatCounter | None = None) -> RevisionOutcome:
    """Extend the rule set and recompile from scratch; an inconsistent
    extension is a status, not an error."""
    rule = replace(rule, index=len(compiled.rules))
    try:
        new_kb = kb_mod.compile(compiled.rules + (rule,), counter)
    except InconsistentRuleSet:
        return RevisionOutcome(INCONSISTENT)
    return RevisionOutcome(ACCEPTED, new_kb)


def accepts_conditional(compiled: CompiledKB, a: Formula, b: Formula,
                        counter: sat.SatCounter | None = None) -> tuple[bool, Rank]:
    """Ramsey test: does ``b`` plausibly follow in the context ``a``?
    Returns the verdict together with the entailment strength."""
    result = query(compiled, a, b, counter)
    return result.strength >= 1, result.strength


def nested_conditional(compiled: CompiledKB, premise: Rule,
                       c: Formula, d: Formula,
                       counter: sat.SatCounter | None = None) -> str:
    """Evaluate "if (premise rule) then (c entails d)" by provisionally
    adding the premise; returns 'holds', 'fails', or 'premise_inconsistent'."""
    outcome = add_rule(compiled, premise, counter)
    if outcome.status == INCONSISTENT:
        return "premise_inconsistent"
    accepted, _ = accepts_conditional(outcome.new_kb, c, d, counter)
    return "holds" if accepted else "fails"


def entrenchment(compiled: CompiledKB) -> list[tuple[Rule, int]]:
    """Rules with their priorities, sorted nondecreasingly (ties adjacent);
    higher priority means more entrenched."""
    return [(r, compiled.z_plus[r]) for r in compiled.order]


def belief_set(state: BeliefState, candidates: Iterable[Formula],
               counter: sat.SatCounter | None = None) -> list[tuple[Formula, Rank]]:
    """The candidates believed in the state (strength >= 1), with strengths."""
    out: list[tuple[Formula, Rank]] = []
    for f in candidates:
        result = believes(state, f, counter)
        if result.strength >= 1:
            out.append((f, result.strength))
    return out
