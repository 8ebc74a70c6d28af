"""Constraint-driven abstraction of event logs into high-level activities."""

from .abstraction import AbstractionStrategy, abstract_log, default_names
from .candidates import (
    CandidateSet,
    Provenance,
    compute_candidates,
    dfg_candidates,
    exhaustive_candidates,
    merge_exclusive,
)
from .constraints import (
    CheckingMode,
    Constraint,
    ConstraintSet,
    Monotonicity,
    Scope,
    checking_mode,
    holds_group,
    holds_grouping,
    load_constraints,
    monotonicity,
    parse_constraints,
)
from .dfg import DFG, compute_dfg, exclusive, post_set, pre_set, to_dot
from .errors import (
    Infeasible,
    LogAbstractionError,
    NoCandidates,
    NotAPartition,
    SolverTimeout,
    TooFewGroups,
)
from .events import Event, EventLog, Timestamp, Trace, load_log, write_log
from .groups import GroupEvaluator, group_distance, grouping_distance, inst, interrupts, missing, occurs
from .metrics import QualityReport, dfg_edge_reduction, quality_report, silhouette, size_reduction
from .optimizer import CoverProblem, Grouping, InfeasibilityReport, diagnose, solve_exact, solve_greedy
from .pipeline import AbstractionResult, run

__all__ = [
    "AbstractionResult", "AbstractionStrategy", "CandidateSet", "CheckingMode", "Constraint",
    "ConstraintSet", "CoverProblem", "DFG", "Event", "EventLog", "GroupEvaluator", "Grouping",
    "Infeasible", "InfeasibilityReport", "LogAbstractionError", "Monotonicity", "NoCandidates",
    "NotAPartition", "Provenance", "QualityReport", "Scope", "SolverTimeout", "Timestamp",
    "TooFewGroups", "Trace", "abstract_log", "checking_mode", "compute_candidates", "compute_dfg",
    "default_names", "dfg_candidates", "dfg_edge_reduction", "diagnose", "exclusive",
    "exhaustive_candidates", "group_distance", "grouping_distance", "holds_group", "holds_grouping",
    "inst", "interrupts", "load_constraints", "load_log", "merge_exclusive", "missing",
    "monotonicity", "occurs", "parse_constraints", "post_set", "pre_set", "quality_report", "run", "silhouette",
    "size_reduction", "solve_exact", "solve_greedy", "to_dot", "write_log",
]
