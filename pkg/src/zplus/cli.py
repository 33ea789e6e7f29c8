"""Interactive REPL and batch command runner.

Every answer starts with one machine-parsable key=value line followed by a
human-readable line.  Batch mode exit codes: 0 ok, 2 parse error, 3 unknown
command, 4 command needs state that is not loaded/compiled yet, 5 I/O error,
6 semantic failure (inconsistent compile, unsatisfiable context, bad
evidence), 7 oracle divergence.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from typing import IO, Iterable

from .formula import (And, Formula, Not, ParseError, Vocabulary, atoms_of,
                      parse, to_text)
from .sat import SatCounter
from . import kb as kb_mod
from .kb import CompiledKB, InconsistentRuleSet, Rule, rule_text
from . import rank as rank_mod
from .rank import INF, ContextUnsatisfiable, QueryResult
from . import evidence as ev_mod
from .evidence import BeliefState, EvidenceError, EvidenceItem, JPartition
from . import revise as revise_mod
from . import oracle as oracle_mod

__all__ = ["Session", "CommandError", "run_command", "run_script", "main"]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNKNOWN = 3
EXIT_STATE = 4
EXIT_IO = 5
EXIT_SEMANTIC = 6
EXIT_DIVERGENCE = 7

_CODE_NAMES = {
    EXIT_PARSE: "parse",
    EXIT_UNKNOWN: "unknown-command",
    EXIT_STATE: "state",
    EXIT_IO: "io",
    EXIT_SEMANTIC: "semantic",
    EXIT_DIVERGENCE: "oracle-divergence",
}


class CommandError(Exception):
    """Command failure; ``preamble`` lines are printed before the error."""

    def __init__(self, code: int, message: str, preamble: Iterable[str] = ()):
        super().__init__(message)
        self.code = code
        self.preamble = tuple(preamble)


class _Quit(Exception):
    pass


@dataclass
class Session:
    vocab: Vocabulary = field(default_factory=Vocabulary)
    rules: list[Rule] = field(default_factory=list)
    kb_path: str | None = None
    compiled: CompiledKB | None = None
    state: BeliefState | None = None
    counter: SatCounter = field(default_factory=SatCounter)
    oracle_check: bool = False
    verify: bool = False
    trace_sat: bool = False
    max_atoms: int = oracle_mod.DEFAULT_MAX_ATOMS


def _fmt(value) -> str:
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    return str(value)


def _parse_level(text: str) -> int | float:
    if text == "inf":
        return INF
    try:
        level = int(text)
    except ValueError:
        raise CommandError(EXIT_PARSE, f"level must be an integer or 'inf', got {text!r}") from None
    if level < 0:
        raise CommandError(EXIT_PARSE, "level must be non-negative")
    return level


def _parse_wff(session: Session, text: str) -> Formula:
    try:
        return parse(text, session.vocab)
    except ParseError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None


def _require_compiled(session: Session) -> CompiledKB:
    if session.compiled is None:
        raise CommandError(EXIT_STATE, "no compiled knowledge base; run 'compile' first")
    return session.compiled


def _require_state(session: Session) -> BeliefState:
    _require_compiled(session)
    assert session.state is not None
    return session.state


def _query_lines(result: QueryResult, calls: int) -> list[str]:
    machine = (f"verdict={result.verdict} strength={_fmt(result.strength)} "
               f"kappa_pro={_fmt(result.kappa_pro)} kappa_con={_fmt(result.kappa_con)} "
               f"sat_calls={calls}")
    prose = (f"{result.verdict}, strength {_fmt(result.strength)} "
             f"(kappa_con={_fmt(result.kappa_con)} kappa_pro={_fmt(result.kappa_pro)})")
    return [machine, prose]


def _split_turnstile(rest: str) -> tuple[str, str]:
    if "|~" not in rest:
        raise CommandError(EXIT_PARSE, "expected '<wff> |~ <wff>'")
    left, right = rest.split("|~", 1)
    if not left.strip() or not right.strip():
        raise CommandError(EXIT_PARSE, "expected '<wff> |~ <wff>'")
    return left, right


# ---------------------------------------------------------------------------
# Oracle cross-checking

def _chain_atoms(chain) -> list[str]:
    out: list[str] = []
    for entry in chain:
        if isinstance(entry, JPartition):
            for cell, _ in entry.cells:
                out.extend(atoms_of(cell))
        else:
            out.extend(atoms_of(entry.formula))
    return out


def _oracle_table(session: Session, extra_atoms: Iterable[str],
                  with_chain: bool) -> oracle_mod.WorldTable | None:
    kb = session.compiled
    assert kb is not None
    vocab: dict[str, None] = dict.fromkeys(kb.vocabulary)
    chain = session.state.chain if (with_chain and session.state) else ()
    for a in _chain_atoms(chain):
        vocab.setdefault(a)
    for a in extra_atoms:
        vocab.setdefault(a)
    if len(vocab) > session.max_atoms:
        return None
    table = oracle_mod.oracle_compile(kb.rules, vocabulary=tuple(vocab),
                                      max_atoms=session.max_atoms)
    for entry in chain:
        table = oracle_mod.oracle_condition(table, entry)
    return table


def _cross_check(session: Session, lines: list[str], engine_value,
                 f: Formula, with_chain: bool) -> None:
    """Compare one rank against the oracle; divergence is loud and fatal."""
    if not session.oracle_check:
        return
    table = _oracle_table(session, atoms_of(f), with_chain)
    if table is None:
        lines.append(f"oracle=skipped reason=vocabulary-above-{session.max_atoms}-atoms")
        return
    reference = oracle_mod.oracle_kappa(table, f)
    if reference != engine_value:
        loud = (f"ORACLE DIVERGENCE on {to_text(f)}: engine={_fmt(engine_value)} "
                f"oracle={_fmt(reference)}")
        raise CommandError(EXIT_DIVERGENCE, loud, preamble=lines)
    lines.append("oracle=agreed")


# ---------------------------------------------------------------------------
# Command handlers

def _cmd_load(session: Session, rest: str) -> list[str]:
    path = rest.strip()
    if not path:
        raise CommandError(EXIT_PARSE, "usage: load <file>")
    try:
        with open(path, encoding="utf-8") as handle:
            rules = kb_mod.load_rules(handle, session.vocab)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot read {path}: {exc}") from None
    except ParseError as exc:
        raise CommandError(EXIT_PARSE, f"{path}: {exc}") from None
    session.rules = rules
    session.kb_path = path
    session.compiled = None
    session.state = None
    return [f"rules={len(rules)} file={path}",
            f"loaded {len(rules)} rules from {path}"]


def _cmd_compile(session: Session, rest: str) -> list[str]:
    before = session.counter.total_calls
    try:
        compiled = kb_mod.compile(session.rules, session.counter)
    except InconsistentRuleSet as exc:
        raise CommandError(EXIT_SEMANTIC, f"inconsistent rule set: {exc}") from None
    session.compiled = compiled
    session.state = BeliefState(compiled)
    calls = session.counter.total_calls - before
    return [f"compiled=true rules={len(compiled.rules)} sat_calls={calls}",
            f"compiled {len(compiled.rules)} rules ({calls} satisfiability calls)"]


def _cmd_consistent(session: Session, rest: str) -> list[str]:
    verdict = kb_mod.is_consistent(session.rules, session.counter)
    return [f"consistent={'true' if verdict else 'false'}",
            "consistent" if verdict else "inconsistent"]


def _cmd_priorities(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    lines = [f"rules={len(kb.order)}"]
    for r in kb.order:
        lines.append(f"z_plus={kb.z_plus[r]} delta={r.delta} rule={rule_text(r, include_delta=False)}")
    return lines


def _cmd_kappa(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    f = _parse_wff(session, rest)
    before = session.counter.total_calls
    value = rank_mod.kappa(kb, f, session.counter)
    calls = session.counter.total_calls - before
    lines = [f"kappa={_fmt(value)} sat_calls={calls}", _fmt(value)]
    _cross_check(session, lines, value, f, with_chain=False)
    return lines


def _cmd_query(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    left, right = _split_turnstile(rest)
    phi = _parse_wff(session, left)
    sigma = _parse_wff(session, right)
    before = session.counter.total_calls
    try:
        result = rank_mod.query(kb, phi, sigma, session.counter)
    except ContextUnsatisfiable as exc:
        raise CommandError(EXIT_SEMANTIC, str(exc)) from None
    lines = _query_lines(result, session.counter.total_calls - before)
    if session.oracle_check:
        _cross_check(session, lines, result.kappa_pro, And(phi, sigma), False)
        _cross_check(session, lines, result.kappa_con, And(phi, Not(sigma)), False)
    return lines


def _cmd_observe(session: Session, rest: str) -> list[str]:
    _require_state(session)
    pieces = rest.strip().split()
    if len(pieces) < 3 or pieces[0] not in ("J", "L"):
        raise CommandError(EXIT_PARSE, "usage: observe J|L <wff> <level|inf>")
    mode = pieces[0]
    level = _parse_level(pieces[-1])
    f = _parse_wff(session, " ".join(pieces[1:-1]))
    try:
        item = EvidenceItem(mode, f, level)
        session.state = ev_mod.observe(session.state, item, session.counter)
    except EvidenceError as exc:
        raise CommandError(EXIT_SEMANTIC, str(exc)) from None
    k = len(session.state.chain)
    return [f"observed={mode} level={_fmt(level)} chain_length={k} formula={to_text(f)}",
            f"recorded {mode}-evidence at level {_fmt(level)}; chain length {k}"]


def _cmd_observe_partition(session: Session, rest: str) -> list[str]:
    _require_state(session)
    cells: list[tuple[Formula, int | float]] = []
    for chunk in rest.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise CommandError(EXIT_PARSE, "usage: observe-partition <wff>:<level> [; <wff>:<level>]*")
        wff_text, level_text = chunk.rsplit(":", 1)
        cells.append((_parse_wff(session, wff_text), _parse_level(level_text.strip())))
    if not cells:
        raise CommandError(EXIT_PARSE, "observe-partition needs at least one cell")
    try:
        session.state = ev_mod.observe_j_partition(session.state, cells, session.counter)
    except EvidenceError as exc:
        raise CommandError(EXIT_SEMANTIC, str(exc)) from None
    k = len(session.state.chain)
    return [f"observed=partition cells={len(cells)} chain_length={k}",
            f"recorded a {len(cells)}-cell partition; chain length {k}"]


def _cmd_believe(session: Session, rest: str) -> list[str]:
    state = _require_state(session)
    f = _parse_wff(session, rest)
    before = session.counter.total_calls
    result = ev_mod.believes(state, f, session.counter)
    lines = _query_lines(result, session.counter.total_calls - before)
    if session.oracle_check:
        _cross_check(session, lines, result.kappa_pro, f, with_chain=True)
        _cross_check(session, lines, result.kappa_con, Not(f), with_chain=True)
    return lines


def _cmd_beliefs(session: Session, rest: str) -> list[str]:
    state = _require_state(session)
    texts = [t for t in rest.split(",") if t.strip()]
    if not texts:
        raise CommandError(EXIT_PARSE, "usage: beliefs <wff> [, <wff>]*")
    lines = []
    held = 0
    for text in texts:
        f = _parse_wff(session, text)
        result = ev_mod.believes(state, f, session.counter)
        flag = result.strength >= 1
        held += flag
        lines.append(f"believed={'true' if flag else 'false'} "
                     f"strength={_fmt(result.strength)} formula={to_text(f)}")
    lines.append(f"{held} of {len(texts)} candidates believed")
    return lines


def _cmd_retract_evidence(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    session.state = BeliefState(kb)
    return ["chain_length=0", "evidence cleared"]


def _cmd_evidence(session: Session, rest: str) -> list[str]:
    state = _require_state(session)
    lines = [f"chain_length={len(state.chain)}"]
    for pos, entry in enumerate(state.chain, start=1):
        if isinstance(entry, JPartition):
            cells = "; ".join(f"{to_text(c)}:{_fmt(l)}" for c, l in entry.cells)
            lines.append(f"{pos}: partition {cells}")
        else:
            lines.append(f"{pos}: {entry.mode} level={_fmt(entry.level)} formula={to_text(entry.formula)}")
    return lines


def _cmd_add_rule(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    try:
        rule = kb_mod.parse_rule(rest, session.vocab)
    except ParseError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    outcome = revise_mod.add_rule(kb, rule, session.counter)
    if outcome.status == revise_mod.INCONSISTENT:
        return ["status=inconsistent",
                f"rule rejected, extension is inconsistent: {rule_text(rule)}"]
    session.compiled = outcome.new_kb
    session.rules = list(outcome.new_kb.rules)
    session.state = BeliefState(outcome.new_kb)
    return [f"status=accepted rules={len(outcome.new_kb.rules)}",
            f"rule added and recompiled: {rule_text(rule)}"]


def _cmd_accepts(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    left, right = _split_turnstile(rest)
    a = _parse_wff(session, left)
    b = _parse_wff(session, right)
    try:
        accepted, strength = revise_mod.accepts_conditional(kb, a, b, session.counter)
    except ContextUnsatisfiable as exc:
        raise CommandError(EXIT_SEMANTIC, str(exc)) from None
    return [f"accepted={'true' if accepted else 'false'} strength={_fmt(strength)}",
            f"conditional {'accepted' if accepted else 'rejected'} at strength {_fmt(strength)}"]


def _cmd_nested(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    m = re.match(r"^\((.*)\)\s*\?\s*(.*)$", rest.strip())
    if not m:
        raise CommandError(EXIT_PARSE, "usage: nested (<wff> -> <wff> [: d]) ? <wff> |~ <wff>")
    try:
        premise = kb_mod.parse_rule(m.group(1), session.vocab)
    except ParseError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    left, right = _split_turnstile(m.group(2))
    c = _parse_wff(session, left)
    d = _parse_wff(session, right)
    try:
        result = revise_mod.nested_conditional(kb, premise, c, d, session.counter)
    except ContextUnsatisfiable as exc:
        raise CommandError(EXIT_SEMANTIC, str(exc)) from None
    return [f"result={result}",
            f"nested conditional: {result.replace('_', ' ')}"]


def _cmd_entrenchment(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    listing = revise_mod.entrenchment(kb)
    lines = [f"levels={len(set(z for _, z in listing))} rules={len(listing)}"]
    by_level: dict[int, list[Rule]] = {}
    for r, z in listing:
        by_level.setdefault(z, []).append(r)
    for z in sorted(by_level):
        texts = "; ".join(rule_text(r, include_delta=False) for r in by_level[z])
        lines.append(f"z_plus={z} rules={texts}")
    return lines


def _cmd_worlds(session: Session, rest: str) -> list[str]:
    _require_compiled(session)
    table = _oracle_table(session, (), with_chain=True)
    if table is None:
        raise CommandError(EXIT_STATE,
                           f"vocabulary exceeds the {session.max_atoms}-atom world cap")
    lines = [f"worlds={len(table)} atoms={len(table.vocabulary)}"]
    for idx in range(len(table)):
        cells = " ".join(f"{a}={int(v)}" for a, v in table.assignment(idx).items())
        lines.append(f"{cells} : kappa={_fmt(table.ranks[idx])}")
    return lines


def _cmd_save(session: Session, rest: str) -> list[str]:
    kb = _require_compiled(session)
    path = rest.strip()
    if not path:
        raise CommandError(EXIT_PARSE, "usage: save <file>")
    try:
        with open(path, "w", encoding="utf-8") as handle:
            kb_mod.save_compiled(kb, handle)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write {path}: {exc}") from None
    return [f"saved={path} rules={len(kb.rules)}",
            f"saved compiled knowledge base to {path}"]


def _cmd_load_compiled(session: Session, rest: str) -> list[str]:
    path = rest.strip()
    if not path:
        raise CommandError(EXIT_PARSE, "usage: load-compiled <file>")
    try:
        with open(path, encoding="utf-8") as handle:
            kb = kb_mod.load_compiled(handle, session.vocab)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot read {path}: {exc}") from None
    except ParseError as exc:
        raise CommandError(EXIT_PARSE, f"{path}: {exc}") from None
    verified = False
    if session.verify:
        for r in kb.rules:
            result = rank_mod.query(kb, r.antecedent, r.consequent, session.counter)
            if not result.strength >= r.delta + 1:
                raise CommandError(
                    EXIT_SEMANTIC,
                    f"stored priorities fail admissibility for rule: {rule_text(r)}")
        verified = True
    session.rules = list(kb.rules)
    session.kb_path = path
    session.compiled = kb
    session.state = BeliefState(kb)
    return [f"loaded_compiled={path} rules={len(kb.rules)} verified={'true' if verified else 'false'}",
            f"loaded compiled knowledge base from {path}"]


def _cmd_satcount(session: Session, rest: str) -> list[str]:
    c = session.counter
    return [f"sat_total={c.total_calls} sat_horn={c.horn_path_calls}",
            f"{c.total_calls} satisfiability calls, {c.horn_path_calls} on the Horn path"]


_HELP = """\
commands:
  load <file>                         read rules (<wff> -> <wff> [: delta])
  compile                             compute rule priorities
  consistent                          check the loaded rules
  priorities                          list compiled priorities
  kappa <wff>                         rank of a formula
  query <wff> |~ <wff>                graded entailment in a context
  observe J|L <wff> <level|inf>       record soft evidence
  observe-partition w:l [; w:l]*      simultaneous J-update on a partition
  believe <wff>                       graded belief under the evidence chain
  beliefs <wff> [, <wff>]*            filter candidates by belief
  retract-evidence                    clear the evidence chain
  evidence                            list the evidence chain
  add-rule <wff> -> <wff> [: d]       revise by rule addition
  accepts <wff> |~ <wff>              Ramsey-test a conditional
  nested (<rule>) ? <wff> |~ <wff>    conditional after provisional addition
  entrenchment                        rules grouped by priority
  worlds                              dump the world table (small vocabularies)
  save <file> / load-compiled <file>  persist / restore compiled priorities
  satcount                            cumulative satisfiability-call counters
  help / quit"""


def _cmd_help(session: Session, rest: str) -> list[str]:
    return [_HELP]


def _cmd_quit(session: Session, rest: str) -> list[str]:
    raise _Quit()


_COMMANDS = {
    "load": _cmd_load,
    "compile": _cmd_compile,
    "consistent": _cmd_consistent,
    "priorities": _cmd_priorities,
    "kappa": _cmd_kappa,
    "query": _cmd_query,
    "observe": _cmd_observe,
    "observe-partition": _cmd_observe_partition,
    "believe": _cmd_believe,
    "beliefs": _cmd_beliefs,
    "retract-evidence": _cmd_retract_evidence,
    "evidence": _cmd_evidence,
    "add-rule": _cmd_add_rule,
    "accepts": _cmd_accepts,
    "nested": _cmd_nested,
    "entrenchment": _cmd_entrenchment,
    "worlds": _cmd_worlds,
    "save": _cmd_save,
    "load-compiled": _cmd_load_compiled,
    "satcount": _cmd_satcount,
    "help": _cmd_help,
    "quit": _cmd_quit,
}


def run_command(session: Session, line: str) -> str:
    """Dispatch one command line; returns the output text."""
    name, _, rest = line.strip().partition(" ")
    handler = _COMMANDS.get(name)
    if handler is None:
        raise CommandError(EXIT_UNKNOWN, f"unknown command: {name!r} (try 'help')")
    return "\n".join(handler(session, rest))


def _execute(session: Session, line: str, out: IO[str]) -> int:
    """Run one line, printing output, errors, and the optional SAT trace;
    returns the error code (0 when fine)."""
    code = EXIT_OK
    try:
        text = run_command(session, line)
        if text:
            out.write(text + "\n")
    except CommandError as exc:
        for extra in exc.preamble:
            out.write(extra + "\n")
        out.write(f"error={_CODE_NAMES.get(exc.code, 'error')} code={exc.code}\n")
        out.write(str(exc) + "\n")
        code = exc.code
    if session.trace_sat:
        c = session.counter
        out.write(f"sat total_calls={c.total_calls} horn_path_calls={c.horn_path_calls}\n")
    return code


def run_script(session: Session, path: str, out: IO[str],
               strict: bool = False) -> int:
    """Execute commands from a file; exit 0 iff no errors.  With ``strict``
    the first error stops the run."""
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        out.write(f"error=io code={EXIT_IO}\n{exc}\n")
        return EXIT_IO
    first_error = EXIT_OK
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            code = _execute(session, line, out)
        except _Quit:
            break
        if code != EXIT_OK:
            if strict:
                return code
            if first_error == EXIT_OK:
                first_error = code
    return first_error


def repl(session: Session, stdin: IO[str], out: IO[str]) -> int:
    interactive = getattr(stdin, "isatty", lambda: False)()
    while True:
        if interactive:
            out.write("z+> ")
            out.flush()
        raw = stdin.readline()
        if not raw:
            break
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            _execute(session, line, out)
        except _Quit:
            break
    return EXIT_OK


def main(argv: list[str] | None = None, stdin: IO[str] | None = None,
         stdout: IO[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="zplus",
        description="Reasoning with variable-strength default rules: "
                    "compile rule priorities, answer graded queries, and "
                    "revise beliefs under soft evidence.")
    parser.add_argument("--kb", metavar="FILE", help="rule file to load on startup")
    parser.add_argument("--script", metavar="FILE", help="run commands from FILE and exit")
    parser.add_argument("--strict", action="store_true",
                        help="stop batch runs at the first error")
    parser.add_argument("--oracle", action="store_true",
                        help="cross-check answers against brute-force world enumeration")
    parser.add_argument("--verify", action="store_true",
                        help="re-verify admissibility when loading compiled files")
    parser.add_argument("--trace-sat", action="store_true", dest="trace_sat",
                        help="print satisfiability counters after each command")
    parser.add_argument("--max-atoms", type=int, default=oracle_mod.DEFAULT_MAX_ATOMS,
                        dest="max_atoms", metavar="N",
                        help="world-enumeration cap for oracle checks and 'worlds'")
    args = parser.parse_args(argv)

    stdin = stdin if stdin is not None else sys.stdin
    out = stdout if stdout is not None else sys.stdout
    session = Session(oracle_check=args.oracle, verify=args.verify,
                      trace_sat=args.trace_sat, max_atoms=args.max_atoms)
    if args.kb:
        code = _execute(session, f"load {args.kb}", out)
        if code != EXIT_OK:
            return code
    if args.script:
        return run_script(session, args.script, out, strict=args.strict)
    return repl(session, stdin, out)


if __name__ == "__main__":
    sys.exit(main())
