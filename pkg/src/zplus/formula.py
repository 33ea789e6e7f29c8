"""Propositional language: atoms, formula ASTs, parsing, printing, evaluation
over worlds, and clausal conversion for the satisfiability backend.

Grammar (whitespace insignificant, ``#`` starts a comment to end of line)::

    wff   := disj ("=>" wff)?          implication, right-associative
    disj  := conj ("|" conj)*
    conj  := unit ("&" unit)*
    unit  := "!" unit | "(" wff ")" | "true" | "false" | IDENT

Identifiers are a letter or underscore followed by letters, digits or
underscores; comparison is case-sensitive.  ``true`` and ``false`` are
reserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Formula", "Const", "Var", "Not", "And", "Or", "Implies",
    "TRUE", "FALSE", "Vocabulary", "ParseError", "parse", "to_text",
    "evaluate", "atoms_of", "node_count", "conjoin", "materialization",
    "ClauseForm", "to_clauses",
]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RESERVED = {"true", "false"}


class ParseError(ValueError):
    """Malformed formula or rule text; carries the character position."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class Vocabulary:
    """Ordered, append-only registry of atom names."""

    def __init__(self, names: Iterable[str] = ()):
        self._index: dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> int:
        """Register ``name`` if new; return its index."""
        i = self._index.get(name)
        if i is None:
            if not _NAME_RE.match(name) or name in _RESERVED:
                raise ValueError(f"invalid atom name: {name!r}")
            i = len(self._index)
            self._index[name] = i
        return i

    def index(self, name: str) -> int:
        return self._index[name]

    def names(self) -> tuple[str, ...]:
        return tuple(self._index)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._index)

    def __iter__(self) -> Iterator[str]:
        return iter(self._index)

    def __repr__(self) -> str:
        return f"Vocabulary({list(self._index)!r})"


class Formula:
    """Base class for formula nodes.  Nodes are immutable and hashable."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "And":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Or":
        return Or(self, other)

    def __invert__(self) -> "Not":
        return Not(self)

    def implies(self, other: "Formula") -> "Implies":
        return Implies(self, other)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True, slots=True)
class Var(Formula):
    name: str

    def __post_init__(self):
        if not _NAME_RE.match(self.name) or self.name in _RESERVED:
            raise ValueError(f"invalid atom name: {self.name!r}")


@dataclass(frozen=True, slots=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


TRUE = Const(True)
FALSE = Const(False)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(r"=>|[()&|!]|[A-Za-z_][A-Za-z0-9_]*")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch == "#":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", pos)
        tokens.append((m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, int]], vocab: Vocabulary):
        self.tokens = tokens
        self.pos = 0
        self.vocab = vocab

    def peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise ParseError("unexpected end of input",
                             self.tokens[-1][1] if self.tokens else 0)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def wff(self) -> Formula:
        left = self.disj()
        if self.peek() == "=>":
            self.take()
            return Implies(left, self.wff())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unit()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unit())
        return f

    def unit(self) -> Formula:
        tok, at = self.take()
        if tok == "!":
            return Not(self.unit())
        if tok == "(":
            f = self.wff()
            closing, at2 = self.take()
            if closing != ")":
                raise ParseError(f"expected ')', found {closing!r}", at2)
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if _NAME_RE.match(tok):
            self.vocab.add(tok)
            return Var(tok)
        raise ParseError(f"unexpected token {tok!r}", at)


def parse(text: str, vocab: Vocabulary) -> Formula:
    """Parse ``text`` into a formula, registering new atoms in ``vocab``."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty formula")
    p = _Parser(tokens, vocab)
    f = p.wff()
    if p.pos < len(tokens):
        tok, at = tokens[p.pos]
        raise ParseError(f"unexpected token {tok!r}", at)
    return f


# ---------------------------------------------------------------------------
# Printing

# precedence: => 1, | 2, & 3, ! 4, atoms/constants 5
def _render(f: Formula, context: int) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Not):
        return "!" + _render(f.child, 4)
    if isinstance(f, And):
        s = _render(f.left, 3) + " & " + _render(f.right, 4)
        return f"({s})" if context > 3 else s
    if isinstance(f, Or):
        s = _render(f.left, 2) + " | " + _render(f.right, 3)
        return f"({s})" if context > 2 else s
    if isinstance(f, Implies):
        s = _render(f.left, 2) + " => " + _render(f.right, 1)
        return f"({s})" if context > 1 else s
    raise TypeError(f"not a formula: {f!r}")


def to_text(f: Formula) -> str:
    """Render ``f`` with minimal parentheses; reparses to an equal AST."""
    return _render(f, 0)


# ---------------------------------------------------------------------------
# Evaluation and structural helpers

def evaluate(f: Formula, world: Mapping[str, bool]) -> bool:
    """Truth value of ``f`` under a total assignment ``world``."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Var):
        try:
            return world[f.name]
        except KeyError:
            raise KeyError(f"atom {f.name!r} not assigned in world") from None
    if isinstance(f, Not):
        return not evaluate(f.child, world)
    if isinstance(f, And):
        return evaluate(f.left, world) and evaluate(f.right, world)
    if isinstance(f, Or):
        return evaluate(f.left, world) or evaluate(f.right, world)
    if isinstance(f, Implies):
        return (not evaluate(f.left, world)) or evaluate(f.right, world)
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> tuple[str, ...]:
    """Atom names of ``f`` in first-occurrence order."""
    seen: dict[str, None] = {}
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            seen.setdefault(node.name)
        elif isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or, Implies)):
            stack.append(node.right)
            stack.append(node.left)
    return tuple(seen)


def node_count(f: Formula) -> int:
    n = 0
    stack = [f]
    while stack:
        node = stack.pop()
        n += 1
        if isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, (And, Or, Implies)):
            stack.append(node.right)
            stack.append(node.left)
    return n


def conjoin(fs: Iterable[Formula]) -> Formula:
    """Left-associated conjunction; empty input yields ``true``."""
    out: Formula | None = None
    for f in fs:
        out = f if out is None else And(out, f)
    return TRUE if out is None else out


def materialization(rules) -> Formula:
    """Conjunction of the rules' material counterparts (antecedent => consequent)."""
    return conjoin(Implies(r.antecedent, r.consequent) for r in rules)


# ---------------------------------------------------------------------------
# Clausal conversion

@dataclass
class ClauseForm:
    """CNF for a formula.  Literals are signed 1-based variable indices into
    ``names``; indices above ``base_count`` are auxiliary definition variables.
    ``horn`` is only ever set for directly (non-auxiliary) converted output.
    """

    clauses: tuple[frozenset[int], ...]
    names: tuple[str, ...]
    base_count: int
    horn: bool
    direct: bool
    max_var: int


def _fold(f: Formula) -> Formula:
    """Constant folding."""
    if isinstance(f, (Const, Var)):
        return f
    if isinstance(f, Not):
        c = _fold(f.child)
        if isinstance(c, Const):
            return FALSE if c.value else TRUE
        return Not(c)
    if isinstance(f, And):
        l, r = _fold(f.left), _fold(f.right)
        if isinstance(l, Const):
            return r if l.value else FALSE
        if isinstance(r, Const):
            return l if r.value else FALSE
        return And(l, r)
    if isinstance(f, Or):
        l, r = _fold(f.left), _fold(f.right)
        if isinstance(l, Const):
            return TRUE if l.value else r
        if isinstance(r, Const):
            return TRUE if r.value else l
        return Or(l, r)
    if isinstance(f, Implies):
        l, r = _fold(f.left), _fold(f.right)
        if isinstance(l, Const):
            return r if l.value else TRUE
        if isinstance(r, Const):
            return TRUE if r.value else Not(l)
        return Implies(l, r)
    raise TypeError(f"not a formula: {f!r}")


def _nnf(f: Formula, negated: bool) -> Formula:
    """Negation normal form of a constant-free formula."""
    if isinstance(f, Var):
        return Not(f) if negated else f
    if isinstance(f, Not):
        return _nnf(f.child, not negated)
    if isinstance(f, And):
        l, r = _nnf(f.left, negated), _nnf(f.right, negated)
        return Or(l, r) if negated else And(l, r)
    if isinstance(f, Or):
        l, r = _nnf(f.left, negated), _nnf(f.right, negated)
        return And(l, r) if negated else Or(l, r)
    if isinstance(f, Implies):
        if negated:
            return And(_nnf(f.left, False), _nnf(f.right, True))
        return Or(_nnf(f.left, True), _nnf(f.right, False))
    raise TypeError(f"not a formula: {f!r}")


class _Blowup(Exception):
    pass


def _direct_cnf(nnf: Formula, lit_of, budget: list[int]) -> list[frozenset[int]]:
    """Distribute to CNF; raises _Blowup when the literal budget is exhausted."""
    if isinstance(nnf, Var):
        return [frozenset((lit_of(nnf.name),))]
    if isinstance(nnf, Not):
        return [frozenset((-lit_of(nnf.child.name),))]
    if isinstance(nnf, And):
        return _direct_cnf(nnf.left, lit_of, budget) + _direct_cnf(nnf.right, lit_of, budget)
    if isinstance(nnf, Or):
        left = _direct_cnf(nnf.left, lit_of, budget)
        right = _direct_cnf(nnf.right, lit_of, budget)
        cost = sum(len(c) for c in left) * len(right) + sum(len(c) for c in right) * len(left)
        if cost > budget[0]:
            raise _Blowup
        out = []
        for a in left:
            for b in right:
                merged = a | b
                if any(-lit in merged for lit in merged):
                    continue  # tautological clause
                out.append(merged)
        budget[0] -= cost
        return out
    raise TypeError(f"unexpected node in NNF: {nnf!r}")


def _tseitin(nnf: Formula, lit_of, names: list[str]) -> list[frozenset[int]]:
    """Definitional conversion; sound for NNF input (one-sided definitions)."""
    clauses: list[frozenset[int]] = []

    def walk(node: Formula) -> int:
        if isinstance(node, Var):
            return lit_of(node.name)
        if isinstance(node, Not):
            return -lit_of(node.child.name)
        names.append(f"_aux{len(names) + 1}")
        v = len(names)
        a, b = walk(node.left), walk(node.right)
        if isinstance(node, And):
            clauses.append(frozenset((-v, a)))
            clauses.append(frozenset((-v, b)))
        elif isinstance(node, Or):
            clauses.append(frozenset((-v, a, b)))
        else:
            raise TypeError(f"unexpected node in NNF: {node!r}")
        return v

    root = walk(nnf)
    clauses.append(frozenset((root,)))
    return clauses


def _dedupe(clauses: list[frozenset[int]]) -> tuple[frozenset[int], ...]:
    return tuple(dict.fromkeys(clauses))


def _is_horn(clauses: Iterable[frozenset[int]]) -> bool:
    return all(sum(1 for lit in c if lit > 0) <= 1 for c in clauses)


def to_clauses(f: Formula, names: list[str] | None = None,
               growth_limit: int = 4) -> ClauseForm:
    """Convert ``f`` to an equisatisfiable clause set.

    Direct distribution is used while the literal count stays within
    ``growth_limit`` times the node count of ``f``; beyond that an
    auxiliary-variable transformation takes over.  The ``horn`` flag is set
    only when the direct conversion succeeded and every clause has at most
    one positive literal.

    ``names`` seeds the variable numbering (index ``i`` is ``names[i-1]``);
    atoms of ``f`` not present are appended, auxiliary variables after them.
    """
    names = list(names) if names is not None else []
    index = {n: i + 1 for i, n in enumerate(names)}

    def lit_of(name: str) -> int:
        i = index.get(name)
        if i is None:
            names.append(name)
            i = len(names)
            index[name] = i
        return i

    for a in atoms_of(f):
        lit_of(a)
    base_count = len(names)

    g = _fold(f)
    if isinstance(g, Const):
        clauses: tuple[frozenset[int], ...] = () if g.value else (frozenset(),)
        return ClauseForm(clauses, tuple(names), base_count, True, True, base_count)

    nnf = _nnf(g, False)
    try:
        budget = [growth_limit * max(node_count(f), 1)]
        raw = _direct_cnf(nnf, lit_of, budget)
        clauses = _dedupe(raw)
        return ClauseForm(clauses, tuple(names), base_count,
                          _is_horn(clauses), True, len(names))
    except _Blowup:
        clauses = _dedupe(_tseitin(nnf, lit_of, names))
        return ClauseForm(clauses, tuple(names), base_count,
                          False, False, len(names))
