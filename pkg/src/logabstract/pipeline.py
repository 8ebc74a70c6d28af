"""The three stages composed: candidates, optimal grouping, abstraction."""

from __future__ import annotations

from dataclasses import dataclass

from .abstraction import AbstractionStrategy, abstract_log, default_names
from .candidates import DEFAULT_TIMEOUT, CandidateSet, compute_candidates
from .constraints import ConstraintSet, validate_against_log
from .errors import Infeasible, NoCandidates, SolverTimeout
from .events import EventLog
from .groups import GroupEvaluator
from .metrics import QualityReport, quality_report
from .optimizer import CoverProblem, Grouping, InfeasibilityReport, diagnose, solve_exact


@dataclass
class AbstractionResult:
    log: EventLog
    abstracted: EventLog
    candidates: CandidateSet | None
    grouping: Grouping | None
    names: dict[frozenset[str], str]
    quality: QualityReport | None
    infeasibility: InfeasibilityReport | None = None

    @property
    def feasible(self) -> bool:
        return self.infeasibility is None


def select_grouping(
    log: EventLog,
    rs: ConstraintSet,
    cands: CandidateSet,
    timeout: float | None = DEFAULT_TIMEOUT,
    evaluator: GroupEvaluator | None = None,
) -> Grouping:
    """Solve the cover problem; on infeasibility attach a full report to the error.

    A cover that fails on a truncated candidate set proves nothing, so that
    case surfaces as :class:`SolverTimeout` rather than infeasibility.
    """
    problem = CoverProblem.from_candidates(cands, log, rs, evaluator)
    try:
        return solve_exact(problem, timeout)
    except (Infeasible, NoCandidates) as exc:
        if cands.truncated:
            raise SolverTimeout(f"candidate search timed out before a grouping was found ({exc})") from None
        if isinstance(exc, NoCandidates):
            raise
        raise Infeasible(str(exc), diagnose(problem, rs, log)) from None


def finish(
    log: EventLog,
    rs: ConstraintSet,
    grouping: Grouping,
    strategy: AbstractionStrategy | str,
    name_attr: str | None = None,
    cands: CandidateSet | None = None,
) -> AbstractionResult:
    names = default_names(grouping.groups, log, name_attr)
    abstracted = abstract_log(log, grouping.groups, strategy, names, rs.max_per_class)
    return AbstractionResult(log, abstracted, cands, grouping, names,
                             quality_report(grouping.groups, log, abstracted))


def run(
    log: EventLog,
    rs: ConstraintSet,
    engine: str = "exhaustive",
    k: int | None = None,
    strategy: AbstractionStrategy | str = AbstractionStrategy.COMPLETION_ONLY,
    timeout: float | None = DEFAULT_TIMEOUT,
    *,
    threads: int = 1,
    name_attr: str | None = None,
) -> AbstractionResult:
    """Full pipeline. An infeasible problem yields the original log and a report."""
    validate_against_log(rs, log)
    evaluator = GroupEvaluator(log, rs.max_per_class)
    cands = compute_candidates(log, rs, engine, k, timeout, threads=threads, evaluator=evaluator)
    try:
        grouping = select_grouping(log, rs, cands, timeout, evaluator)
    except Infeasible as exc:
        return AbstractionResult(log, log, cands, None, {}, None, exc.report)
    return finish(log, rs, grouping, strategy, name_attr, cands)
