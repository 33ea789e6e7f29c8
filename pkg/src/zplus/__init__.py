"""Reasoning with variable-strength default rules: priority compilation,
graded plausibility queries, and belief change under soft evidence."""

from .formula import (And, Const, FALSE, Formula, Implies, Not, Or, ParseError,
                      TRUE, Var, Vocabulary, evaluate, materialization, parse,
                      to_clauses, to_text)
from .sat import SatCounter, find_model, is_satisfiable
from .kb import (CompiledKB, InconsistentRuleSet, Rule, compile, is_consistent,
                 kappa_world, load_compiled, load_rules, save_compiled,
                 tolerated)
from .rank import (INF, ContextUnsatisfiable, QueryResult, Rank,
                   conditional_kappa, kappa, query)
from .evidence import (BeliefState, EvidenceError, EvidenceItem, JPartition,
                       believes, observe, observe_j_partition, state_kappa)
from .revise import (RevisionOutcome, accepts_conditional, add_rule,
                     belief_set, entrenchment, nested_conditional)
from .oracle import WorldTable, models_mask, oracle_compile, oracle_condition, oracle_kappa

__version__ = "0.1.0"
