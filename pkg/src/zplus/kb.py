"""Rule base management: toleration tests, consistency checking, and
compilation of per-rule priorities by iterated toleration with partial-rank
binary search.

Rule file format, one rule per line::

    <wff> -> <wff> [: <delta>]     # delta defaults to 0; '#' comments

Compiled persistence starts with the header ``zplus-compiled 1`` followed by
one ``<z> <delta> <antecedent> -> <consequent>`` line per rule in priority
order.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

from .formula import (And, Formula, Implies, ParseError, Vocabulary, atoms_of,
                      conjoin, evaluate, materialization, parse, to_clauses,
                      to_text)
from . import sat
from .rank import _min_satisfiable_cut

__all__ = ["DELTA_MAX", "Rule", "CompiledKB", "InconsistentRuleSet",
           "tolerated", "is_consistent", "compile", "kappa_world",
           "rule_text", "parse_rule", "load_rules", "save_compiled",
           "load_compiled"]

DELTA_MAX = 2 ** 31 - 2

# clause group paired with its Horn flag, pre-converted for assembly
_Part = tuple[tuple[frozenset[int], ...], bool]


@dataclass(frozen=True, slots=True)
class Rule:
    """A default rule: antecedent, consequent, non-negative strength delta,
    and its ordinal position in the source."""

    antecedent: Formula
    consequent: Formula
    delta: int = 0
    index: int = 0

    def __post_init__(self):
        if not isinstance(self.delta, int) or not 0 <= self.delta <= DELTA_MAX:
            raise ValueError(f"rule strength must be in 0..{DELTA_MAX}, got {self.delta!r}")

    @property
    def material(self) -> Implies:
        """The classical counterpart antecedent => consequent."""
        return Implies(self.antecedent, self.consequent)


def rule_text(rule: Rule, include_delta: bool = True) -> str:
    base = f"{to_text(rule.antecedent)} -> {to_text(rule.consequent)}"
    return f"{base} : {rule.delta}" if include_delta else base


class InconsistentRuleSet(Exception):
    """A nonempty rule subset in which no rule is tolerated."""

    def __init__(self, subset: Iterable[Rule]):
        self.subset = tuple(subset)
        listing = "; ".join(rule_text(r) for r in self.subset)
        super().__init__(f"no tolerated rule in subset: {listing}")


def tolerated(rule: Rule, context: Iterable[Rule],
              counter: sat.SatCounter | None = None) -> bool:
    """One satisfiability test: the rule's antecedent and consequent jointly
    with every context rule's material counterpart."""
    wff = conjoin([rule.antecedent, rule.consequent, materialization(context)])
    return sat.is_satisfiable(wff, counter)


def is_consistent(rules: Iterable[Rule],
                  counter: sat.SatCounter | None = None) -> bool:
    """Batch-remove tolerated rules until the set empties or gets stuck."""
    remaining = list(rules)
    while remaining:
        kept = [r for r in remaining if not tolerated(r, remaining, counter)]
        if len(kept) == len(remaining):
            return False
        remaining = kept
    return True


@dataclass(frozen=True, eq=False)
class CompiledKB:
    """A rule set with computed priorities, sorted nondecreasingly.

    Immutable after construction; safe for concurrent readers.  ``mat_parts``
    caches each ordered rule's directly-converted material clauses over
    ``vocabulary`` numbering (None when direct conversion was not possible,
    in which case ``fast_path`` is off and callers fall back to whole-formula
    conversion).
    """

    rules: tuple[Rule, ...]
    z_plus: Mapping[Rule, int]
    order: tuple[Rule, ...]
    vocabulary: tuple[str, ...]
    mat_parts: tuple[_Part | None, ...]
    fast_path: bool

    @classmethod
    def build(cls, rules: Iterable[Rule], z_plus: Mapping[Rule, int]) -> "CompiledKB":
        rules = tuple(rules)
        for r in rules:
            if z_plus[r] < r.delta:
                raise ValueError(f"priority below rule strength: {rule_text(r)}")
        order = tuple(sorted(rules, key=lambda r: (z_plus[r], r.index)))
        seen: dict[str, None] = {}
        for r in rules:
            for a in atoms_of(r.antecedent) + atoms_of(r.consequent):
                seen.setdefault(a)
        vocabulary = tuple(seen)
        names = list(vocabulary)
        parts: list[_Part | None] = []
        for r in order:
            cf = to_clauses(r.material, names=names)
            parts.append((cf.clauses, cf.horn) if cf.direct else None)
        return cls(rules, dict(z_plus), order, vocabulary, tuple(parts),
                   all(p is not None for p in parts))


def kappa_world(kb: CompiledKB, world: Mapping[str, bool]) -> int:
    """0 for a world violating no rule, else one above the highest violated
    priority.  The world must cover the KB vocabulary."""
    missing = [a for a in kb.vocabulary if a not in world]
    if missing:
        raise ValueError(f"world is missing atoms: {', '.join(missing)}")
    worst = -1
    for r in kb.rules:
        if evaluate(r.antecedent, world) and not evaluate(r.consequent, world):
            z = kb.z_plus[r]
            if z > worst:
                worst = z
    return worst + 1


def compile(rules: Iterable[Rule],
            counter: sat.SatCounter | None = None) -> CompiledKB:
    """Compute the priority of every rule.

    Rules tolerated by the full set start at priority delta; afterwards, each
    round ranks the rules tolerated by the uncommitted remainder against the
    partial ranking of already-committed rules (binary search) and commits a
    single lowest-priority rule, lowest source index first.  Raises
    InconsistentRuleSet as soon as some remainder tolerates nothing.
    """
    rules = tuple(rules)
    seen: dict[str, None] = {}
    for r in rules:
        for a in atoms_of(r.antecedent) + atoms_of(r.consequent):
            seen.setdefault(a)
    names = list(seen)

    pos_parts: list[_Part | None] = []
    mat_parts: list[_Part | None] = []
    for r in rules:
        cf = to_clauses(And(r.antecedent, r.consequent), names=names)
        pos_parts.append((cf.clauses, cf.horn) if cf.direct else None)
        cfm = to_clauses(r.material, names=names)
        mat_parts.append((cfm.clauses, cfm.horn) if cfm.direct else None)

    def tolerated_by(i: int, context: list[int]) -> bool:
        parts = [pos_parts[i]] + [mat_parts[j] for j in context]
        if all(p is not None for p in parts):
            return sat.satisfiable_parts(parts, counter)
        wff = conjoin([rules[i].antecedent, rules[i].consequent,
                       materialization(rules[j] for j in context)])
        return sat.is_satisfiable(wff, counter)

    z: dict[int, int] = {}
    committed: list[int] = []   # positions sorted nondecreasingly by (z, index)

    def partial_kappa(i: int, remainder: list[int]) -> int:
        """Rank of rule i's toleration formula against the committed rules;
        the formula is known satisfiable (i is tolerated by the remainder)."""
        k = len(committed)
        if k == 0:
            return 0
        g_parts = [pos_parts[i]] + [mat_parts[j] for j in remainder]
        if all(p is not None for p in g_parts) and all(
                mat_parts[j] is not None for j in committed):
            def sat_at(c: int) -> bool:
                parts = g_parts + [mat_parts[j] for j in committed[c - 1:]]
                return sat.satisfiable_parts(parts, counter)
        else:
            g = conjoin([rules[i].antecedent, rules[i].consequent,
                         materialization(rules[j] for j in remainder)])

            def sat_at(c: int) -> bool:
                suffix = materialization(rules[j] for j in committed[c - 1:])
                return sat.is_satisfiable(And(g, suffix), counter)

        c = _min_satisfiable_cut(sat_at, k)
        return 0 if c == 1 else z[committed[c - 2]] + 1

    remaining = list(range(len(rules)))
    base = [i for i in remaining if tolerated_by(i, remaining)]
    if remaining and not base:
        raise InconsistentRuleSet(rules[i] for i in remaining)
    for i in base:
        z[i] = rules[i].delta
    committed = sorted(base, key=lambda i: (z[i], rules[i].index))
    base_set = set(base)
    remaining = [i for i in remaining if i not in base_set]

    while remaining:
        candidates = [i for i in remaining if tolerated_by(i, remaining)]
        if not candidates:
            raise InconsistentRuleSet(rules[i] for i in remaining)
        best = None
        best_z = 0
        for i in candidates:
            zi = partial_kappa(i, remaining) + rules[i].delta
            if best is None or (zi, rules[i].index) < (best_z, rules[best].index):
                best, best_z = i, zi
        z[best] = best_z
        keys = [(z[j], rules[j].index) for j in committed]
        committed.insert(bisect.bisect_right(keys, (best_z, rules[best].index)), best)
        remaining.remove(best)

    return CompiledKB.build(rules, {rules[i]: z[i] for i in range(len(rules))})


# ---------------------------------------------------------------------------
# Rule files and compiled persistence

def parse_rule(text: str, vocab: Vocabulary, index: int = 0) -> Rule:
    """Parse one ``<wff> -> <wff> [: <delta>]`` line."""
    body = text.split("#", 1)[0].strip()
    if "->" not in body:
        raise ParseError(f"rule must contain '->': {text.strip()!r}")
    left, right = body.split("->", 1)
    delta = 0
    if ":" in right:
        right, dtext = right.rsplit(":", 1)
        try:
            delta = int(dtext.strip())
        except ValueError:
            raise ParseError(f"invalid rule strength: {dtext.strip()!r}") from None
    if not 0 <= delta <= DELTA_MAX:
        raise ParseError(f"rule strength must be in 0..{DELTA_MAX}, got {delta}")
    return Rule(parse(left, vocab), parse(right, vocab), delta, index)


def load_rules(lines: Iterable[str], vocab: Vocabulary) -> list[Rule]:
    """Read rules from text lines; blanks and comments are skipped."""
    rules: list[Rule] = []
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            rules.append(parse_rule(body, vocab, index=len(rules)))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return rules


_COMPILED_HEADER = "zplus-compiled 1"


def save_compiled(kb: CompiledKB, out: IO[str]) -> None:
    out.write(_COMPILED_HEADER + "\n")
    for r in kb.order:
        out.write(f"{kb.z_plus[r]} {r.delta} {rule_text(r, include_delta=False)}\n")


def load_compiled(lines: Iterable[str], vocab: Vocabulary) -> CompiledKB:
    """Rebuild a compiled KB from its persisted form without any
    satisfiability work; stored priorities are trusted."""
    it = iter(lines)
    header = next(it, "").strip()
    if header != _COMPILED_HEADER:
        raise ParseError(f"bad header: expected {_COMPILED_HEADER!r}, got {header!r}")
    rules: list[Rule] = []
    z_plus: dict[Rule, int] = {}
    last_z = -1
    for lineno, raw in enumerate(it, start=2):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.split(None, 2)
        if len(fields) != 3:
            raise ParseError(f"line {lineno}: expected '<z> <delta> <rule>'")
        try:
            zval, delta = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer priority fields") from None
        rule = parse_rule(f"{fields[2]} : {delta}", vocab, index=len(rules))
        if zval < delta:
            raise ParseError(f"line {lineno}: priority {zval} below strength {delta}")
        if zval < last_z:
            raise ParseError(f"line {lineno}: priorities out of order")
        last_z = zval
        rules.append(rule)
        z_plus[rule] = zval
    return CompiledKB.build(rules, z_plus)
