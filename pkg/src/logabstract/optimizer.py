"""Selection of a minimum-distance exact cover from candidate groups."""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from .candidates import CandidateSet
from .constraints import ConstraintSet, Violation, holds_group, holds_grouping
from .errors import Infeasible, NoCandidates, SolverTimeout
from .events import EventLog
from .groups import GroupEvaluator

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9


def signature(groups: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    return tuple(sorted(tuple(sorted(g)) for g in groups))


@dataclass(frozen=True)
class Grouping:
    groups: tuple[frozenset[str], ...]
    objective: float
    proven: bool = True
    distances: Mapping[frozenset[str], float] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(frozenset(g) for g in sorted(self.groups, key=sorted)))

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def signature(self) -> tuple[tuple[str, ...], ...]:
        return signature(self.groups)

    def as_sets(self) -> set[frozenset[str]]:
        return set(self.groups)

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "proven_optimal": self.proven,
            "groups": [
                {"classes": sorted(g), "distance": self.distances.get(g)} for g in self.groups
            ],
        }


def better(a_obj: float, a_groups, b_obj: float, b_groups) -> bool:
    """Whether cover ``a`` is preferred over ``b`` under the tie rules."""
    if a_obj < b_obj - TOLERANCE:
        return True
    if a_obj > b_obj + TOLERANCE:
        return False
    return (len(a_groups), signature(a_groups)) < (len(b_groups), signature(b_groups))


@dataclass(frozen=True)
class CoverProblem:
    """Weighted candidate groups over a class universe, with optional count bounds."""

    weights: Mapping[frozenset[str], float]
    classes: frozenset[str]
    max_groups: int | None = None
    min_groups: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", {frozenset(g): float(w) for g, w in self.weights.items()})
        object.__setattr__(self, "classes", frozenset(self.classes))
        for g in self.weights:
            if not g:
                raise ValueError("candidate groups must be non-empty")
            if not g <= self.classes:
                raise ValueError(f"candidate {sorted(g)} holds classes outside the universe")

    @classmethod
    def from_candidates(
        cls,
        cands: CandidateSet | Iterable[frozenset[str]],
        log: EventLog,
        rs: ConstraintSet | None = None,
        evaluator: GroupEvaluator | None = None,
    ) -> "CoverProblem":
        rs = rs or ConstraintSet()
        evaluator = evaluator or GroupEvaluator(log, rs.max_per_class)
        weights = {frozenset(g): evaluator.distance(g) for g in cands}
        hi, lo = rs.group_count_bounds()
        return cls(weights, log.classes, hi, lo)

    @property
    def uncovered(self) -> frozenset[str]:
        covered = frozenset().union(*self.weights) if self.weights else frozenset()
        return self.classes - covered


class _Indexed:
    """Bitmask view of a cover problem."""

    def __init__(self, problem: CoverProblem):
        self.order = sorted(problem.classes)
        self.bit = {c: 1 << i for i, c in enumerate(self.order)}
        self.full = (1 << len(self.order)) - 1
        cands = sorted(problem.weights, key=lambda g: (len(g), sorted(g)))
        self.groups = cands
        self.masks = [sum(self.bit[c] for c in g) for g in cands]
        self.weights = [problem.weights[g] for g in cands]
        self.share = [w / len(g) for w, g in zip(self.weights, cands)]
        self.by_class = [[j for j, m in enumerate(self.masks) if m >> i & 1] for i in range(len(self.order))]

    def lowest_uncovered(self, covered: int) -> int:
        free = ~covered & self.full
        return (free & -free).bit_length() - 1

    def lower_bound(self, covered: int) -> float | None:
        """Admissible completion cost, or ``None`` if some class cannot be covered."""
        total = 0.0
        free = ~covered & self.full
        i = 0
        while free:
            if free & 1:
                best = None
                for j in self.by_class[i]:
                    if not self.masks[j] & covered:
                        s = self.share[j]
                        if best is None or s < best:
                            best = s
                if best is None:
                    return None
                total += best
            free >>= 1
            i += 1
        return total


def solve_exact(problem: CoverProblem, time_limit: float | None = None) -> Grouping:
    """Minimum-weight exact cover via best-first branch and bound.

    Ties within ``TOLERANCE`` prefer fewer groups, then the lexicographically
    smallest sorted signature. When ``time_limit`` (seconds) expires the best
    cover found so far is returned with ``proven=False``.
    """
    if not problem.weights:
        raise NoCandidates("no candidate groups to select from")
    if problem.max_groups is not None and problem.min_groups is not None and problem.max_groups < problem.min_groups:
        raise Infeasible("contradictory group-count bounds", diagnose_cover(problem))
    ix = _Indexed(problem)
    n = len(ix.order)
    hi = problem.max_groups
    lo = problem.min_groups or 0
    deadline = None if time_limit is None else time.monotonic() + time_limit
    counter = itertools.count()

    best: tuple[float, tuple[int, ...]] | None = None

    def best_groups():
        return [ix.groups[j] for j in best[1]]

    root_lb = ix.lower_bound(0)
    heap: list = []
    if root_lb is not None:
        heap.append((root_lb, 0, next(counter), 0.0, 0, ()))
    timed_out = False
    while heap:
        lb, _, _, cost, covered, chosen = heapq.heappop(heap)
        if best is not None and lb > best[0] + TOLERANCE:
            break
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            break
        if covered == ix.full:
            groups = [ix.groups[j] for j in chosen]
            if best is None or better(cost, groups, best[0], best_groups()):
                best = (cost, chosen)
            continue
        k = len(chosen)
        if hi is not None and k >= hi:
            continue
        i = ix.lowest_uncovered(covered)
        for j in ix.by_class[i]:
            m = ix.masks[j]
            if m & covered:
                continue
            nc = covered | m
            remaining = n - bin(nc).count("1")
            if k + 1 + remaining < lo:
                continue
            if hi is not None and nc != ix.full and k + 1 >= hi:
                continue
            rest = ix.lower_bound(nc)
            if rest is None:
                continue
            ncost = cost + ix.weights[j]
            nlb = ncost + rest
            if best is not None and nlb > best[0] + TOLERANCE:
                continue
            heapq.heappush(heap, (nlb, -(k + 1), next(counter), ncost, nc, chosen + (j,)))

    if best is None:
        if timed_out:
            raise SolverTimeout("time limit reached before any exact cover was found")
        raise Infeasible("no exact cover satisfies the constraints", diagnose_cover(problem))
    groups = best_groups()
    return Grouping(tuple(groups), best[0], proven=not timed_out,
                    distances={g: problem.weights[g] for g in groups})


def enumerate_covers(problem: CoverProblem) -> list[tuple[float, list[frozenset[str]]]]:
    """Every exact cover respecting the bounds, as ``(objective, groups)``."""
    order = sorted(problem.classes)
    by_class = {c: sorted((g for g in problem.weights if c in g), key=sorted) for c in order}
    out: list[tuple[float, list[frozenset[str]]]] = []

    def walk(covered: frozenset[str], chosen: list[frozenset[str]]):
        free = [c for c in order if c not in covered]
        if not free:
            r = len(chosen)
            if (problem.max_groups is None or r <= problem.max_groups) and (
                    problem.min_groups is None or r >= problem.min_groups):
                out.append((sum(problem.weights[g] for g in chosen), list(chosen)))
            return
        for g in by_class[free[0]]:
            if not g & covered:
                chosen.append(g)
                walk(covered | g, chosen)
                chosen.pop()

    walk(frozenset(), [])
    return out


def solve_greedy(
    log: EventLog,
    rs: ConstraintSet | None = None,
    evaluator: GroupEvaluator | None = None,
) -> Grouping:
    """Pairwise agglomerative merging starting from singletons.

    Each step applies the constraint-satisfying merge of two co-occurring
    groups with the lowest resulting total distance, and stops once no merge
    strictly lowers it. Group-count bounds are not enforced.
    """
    rs = rs or ConstraintSet()
    per_group = rs.without_grouping()
    evaluator = evaluator or GroupEvaluator(log, rs.max_per_class)
    groups = [frozenset([c]) for c in sorted(log.classes)]
    bad = [g for g in groups if not holds_group(g, per_group, log, evaluator)]
    if bad:
        raise Infeasible(f"singleton groups violate constraints: {[sorted(g)[0] for g in bad]}")
    dist = {g: evaluator.distance(g) for g in groups}
    rejected: set[frozenset[str]] = set()
    while True:
        best = None
        for a, b in itertools.combinations(groups, 2):
            u = a | b
            if u in rejected:
                continue
            if not evaluator.occurs(u) or not holds_group(u, per_group, log, evaluator):
                rejected.add(u)
                continue
            delta = evaluator.distance(u) - dist[a] - dist[b]
            key = (delta, signature([u]))
            if best is None or key < best[0]:
                best = (key, a, b, u)
        if best is None or best[0][0] >= -TOLERANCE:
            break
        _, a, b, u = best
        groups = sorted([g for g in groups if g not in (a, b)] + [u], key=sorted)
        dist[u] = evaluator.distance(u)
    return Grouping(tuple(groups), sum(dist[g] for g in groups), proven=False,
                    distances={g: dist[g] for g in groups})


# ---------------------------------------------------------------------------
# infeasibility
# ---------------------------------------------------------------------------


@dataclass
class InfeasibilityReport:
    uncovered_classes: tuple[str, ...] = ()
    evidence: dict[str, list[Violation]] = field(default_factory=dict)
    bound_conflicts: list[str] = field(default_factory=list)
    min_achievable_groups: int | None = None
    max_achievable_groups: int | None = None
    notes: list[str] = field(default_factory=list)

    def __bool__(self):
        return bool(self.uncovered_classes or self.bound_conflicts or self.notes)

    def to_dict(self) -> dict:
        return {
            "uncovered_classes": list(self.uncovered_classes),
            "evidence": {c: [v.to_dict() for v in vs] for c, vs in sorted(self.evidence.items())},
            "bound_conflicts": list(self.bound_conflicts),
            "min_achievable_groups": self.min_achievable_groups,
            "max_achievable_groups": self.max_achievable_groups,
            "notes": list(self.notes),
        }


def _cover_count_range(problem: CoverProblem) -> tuple[int, int] | None:
    """Fewest and most groups over all exact covers, ignoring bounds."""
    ix = _Indexed(problem)

    @lru_cache(maxsize=None)
    def rng(covered: int):
        if covered == ix.full:
            return (0, 0)
        i = ix.lowest_uncovered(covered)
        lo = hi = None
        for j in ix.by_class[i]:
            m = ix.masks[j]
            if m & covered:
                continue
            sub = rng(covered | m)
            if sub is None:
                continue
            lo = sub[0] + 1 if lo is None else min(lo, sub[0] + 1)
            hi = sub[1] + 1 if hi is None else max(hi, sub[1] + 1)
        return None if lo is None else (lo, hi)

    try:
        return rng(0)
    finally:
        rng.cache_clear()


def diagnose_cover(problem: CoverProblem) -> InfeasibilityReport:
    """Structural causes of infeasibility that need no log access."""
    report = InfeasibilityReport(uncovered_classes=tuple(sorted(problem.uncovered)))
    hi, lo = problem.max_groups, problem.min_groups
    if hi is not None and lo is not None and hi < lo:
        report.bound_conflicts.append(f"maximum group count {hi} is below minimum group count {lo}")
    if report.uncovered_classes:
        return report
    rng = _cover_count_range(problem)
    if rng is None:
        report.notes.append("every class is covered by some candidate, but no combination of disjoint candidates covers all classes")
        return report
    report.min_achievable_groups, report.max_achievable_groups = rng
    if hi is not None and rng[0] > hi:
        report.bound_conflicts.append(f"fewest achievable groups is {rng[0]}, above the maximum of {hi}")
    if lo is not None and rng[1] < lo:
        report.bound_conflicts.append(f"most achievable groups is {rng[1]}, below the minimum of {lo}")
    return report


def diagnose(
    problem: CoverProblem,
    rs: ConstraintSet,
    log: EventLog,
) -> InfeasibilityReport:
    """Explain why ``problem`` has no feasible cover.

    Raises ``ValueError`` when the problem is in fact feasible.
    """
    report = diagnose_cover(problem)
    if not report:
        try:
            solve_exact(problem)
        except Infeasible:
            report.notes.append("no exact cover exists within the group-count bounds")
        else:
            raise ValueError("problem is feasible; nothing to diagnose")
    evaluator = GroupEvaluator(log, rs.max_per_class)
    per_group = rs.without_grouping()
    for c in report.uncovered_classes:
        res = holds_group(frozenset([c]), per_group, log, evaluator, short_circuit=False)
        report.evidence[c] = list(res.violations)
    return report


def validate_grouping(grouping: Grouping, rs: ConstraintSet, log: EventLog) -> bool:
    return holds_grouping(grouping.groups, rs, log).ok
