"""Computation of candidate groups that satisfy per-group constraints.

Three procedures are provided: an exhaustive level-wise search, a search
that grows paths of the directly-follows graph under a beam, and a pass that
merges exclusive behavioural alternatives.
"""

from __future__ import annotations

import enum
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .constraints import (
    CheckingMode,
    CheckResult,
    ConstraintSet,
    Kind,
    anti_monotonic_part,
    checking_mode,
    holds_group,
)
from .dfg import DFG, PrePostIndex, compute_dfg, exclusive
from .events import EventLog
from .groups import GroupEvaluator, occurs

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5 * 3600.0


class Provenance(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    DFG_PATH = "dfg_path"
    EXCLUSIVE_MERGE = "exclusive_merge"


def group_key(g: Iterable[str]) -> tuple:
    """Total order on groups: size, then sorted class names."""
    s = tuple(sorted(g))
    return (len(s), s)


@dataclass
class CandidateSet:
    groups: dict[frozenset[str], Provenance] = field(default_factory=dict)
    truncated: bool = False
    checked: int = 0
    admitted_without_check: set[frozenset[str]] = field(default_factory=set)
    evidence: dict[frozenset[str], CheckResult] = field(default_factory=dict)

    def __contains__(self, g) -> bool:
        return frozenset(g) in self.groups

    def __iter__(self):
        return iter(sorted(self.groups, key=group_key))

    def __len__(self):
        return len(self.groups)

    def add(self, g: Iterable[str], provenance: Provenance) -> bool:
        g = frozenset(g)
        if g in self.groups:
            return False
        self.groups[g] = provenance
        return True

    def as_sets(self) -> set[frozenset[str]]:
        return set(self.groups)

    def copy(self) -> "CandidateSet":
        return CandidateSet(dict(self.groups), self.truncated, self.checked,
                            set(self.admitted_without_check), dict(self.evidence))


class _Checker:
    """Evaluates groups against the pruning-relevant split of a constraint set."""

    def __init__(self, log: EventLog, rs: ConstraintSet, mode: CheckingMode, trust_declared: bool,
                 evaluator: GroupEvaluator | None):
        self.log = log
        self.rs = rs
        self.mode = mode
        self.evaluator = evaluator or GroupEvaluator(log, rs.max_per_class)
        if mode is CheckingMode.ANTI_MONOTONIC:
            self.anti = anti_monotonic_part(rs, None if trust_declared else log)
            # perclass bounds stay in both parts: they decide how instances split
            rest = [c for c in rs.per_group
                    if c not in self.anti.constraints or c.kind is Kind.INSTANCE_CLASS_CARDINALITY_MAX]
            self.rest = ConstraintSet(tuple(rest))
        else:
            self.anti, self.rest = ConstraintSet(), rs.without_grouping()

    def __call__(self, g: frozenset[str]) -> tuple[bool, bool, CheckResult]:
        """Return ``(passes_anti_part, passes_all, result)``."""
        if self.anti.constraints:
            res = holds_group(g, self.anti, self.log, self.evaluator)
            if not res:
                return False, False, res
        res = holds_group(g, self.rest, self.log, self.evaluator)
        return True, bool(res), res


def _run(fn: Callable, items: Sequence, threads: int, deadline: float | None) -> tuple[list, bool]:
    """Apply ``fn`` to ``items`` in order; stop early once ``deadline`` passes."""
    out: list = []
    if threads <= 1 or len(items) < 2:
        for it in items:
            if deadline is not None and time.monotonic() > deadline:
                return out, True
            out.append(fn(it))
        return out, False
    chunk = max(threads * 4, 1)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, len(items), chunk):
            if deadline is not None and time.monotonic() > deadline:
                return out, True
            out.extend(pool.map(fn, items[start:start + chunk]))
    return out, False


def _has_known_subset(g: frozenset[str], known: dict) -> bool:
    if any(g - {c} in known for c in g if len(g) > 1):
        return True
    return any(h < g for h in known)


def _deadline(timeout: float | None) -> float | None:
    return None if timeout is None else time.monotonic() + timeout


def _singleton_evidence(cands: CandidateSet, g: frozenset[str], res: CheckResult) -> None:
    if len(g) == 1 and not res.ok:
        cands.evidence[g] = res


def exhaustive_candidates(
    log: EventLog,
    rs: ConstraintSet,
    timeout: float | None = DEFAULT_TIMEOUT,
    *,
    threads: int = 1,
    trust_declared: bool = False,
    evaluator: GroupEvaluator | None = None,
) -> CandidateSet:
    """Level-wise search over co-occurring groups of increasing size.

    The pruning mode is derived from the constraints. By default only
    monotonicity that provably holds on ``log`` is used for pruning, which
    keeps the result equal to an unpruned enumeration; ``trust_declared``
    prunes with the declared classes instead.
    """
    mode = checking_mode(rs, None if trust_declared else log)
    check = _Checker(log, rs, mode, trust_declared, evaluator)
    classes = sorted(log.classes)
    deadline = _deadline(timeout)
    cands = CandidateSet()

    to_check = [frozenset([c]) for c in classes]
    while to_check:
        results, cut = _run(check, to_check, threads, deadline)
        cands.checked += len(results)
        new, expandable = [], []
        for g, (anti_ok, ok, res) in zip(to_check, results):
            _singleton_evidence(cands, g, res)
            if mode is CheckingMode.MONOTONIC and _has_known_subset(g, cands.groups):
                new.append(g)
                if not ok:
                    cands.admitted_without_check.add(g)
            elif ok:
                new.append(g)
            if anti_ok:
                expandable.append(g)
        for g in new:
            cands.add(g, Provenance.EXHAUSTIVE)
        if cut:
            cands.truncated = True
            logger.warning("exhaustive candidate search timed out with %d candidates", len(cands))
            break
        if mode is CheckingMode.ANTI_MONOTONIC:
            base = expandable
        else:
            base = to_check
        grown = {g | {c} for g in base for c in classes if c not in g}
        to_check = sorted((g for g in grown if occurs(g, log)), key=group_key)
    return cands


def default_beam_width(log: EventLog) -> int:
    return 5 * len(log.classes)


def dfg_candidates(
    log: EventLog,
    rs: ConstraintSet,
    k: int | None = None,
    timeout: float | None = DEFAULT_TIMEOUT,
    *,
    threads: int = 1,
    trust_declared: bool = False,
    evaluator: GroupEvaluator | None = None,
    dfg: DFG | None = None,
) -> CandidateSet:
    """Grow candidate groups along directly-follows paths under a beam.

    ``k=None`` disables the beam. The trivial one-class paths are all checked
    regardless of ``k`` so that every admissible class stays coverable. Paths
    over the same class set are checked once; expansion only depends on a
    path's class set and its two end points, so paths are tracked as
    ``(classes, head, tail)``.
    """
    if k is not None and k < 1:
        raise ValueError("beam width must be >= 1")
    mode = checking_mode(rs, None if trust_declared else log)
    check = _Checker(log, rs, mode, trust_declared, evaluator)
    ev = check.evaluator
    dfg = dfg or compute_dfg(log)
    deadline = _deadline(timeout)
    cands = CandidateSet()

    to_check: dict[frozenset[str], set[tuple[str, str]]] = {
        frozenset([n]): {(n, n)} for n in sorted(dfg.nodes)
    }
    while to_check:
        ordered = sorted(to_check, key=lambda g: (ev.distance(g), tuple(sorted(g))))
        seeding = cands.checked == 0
        beam = ordered if k is None or seeding else ordered[:k]
        results, cut = _run(check, beam, threads, deadline)
        cands.checked += len(results)
        to_expand: list[frozenset[str]] = []
        for g, (anti_ok, ok, res) in zip(beam, results):
            _singleton_evidence(cands, g, res)
            if mode is CheckingMode.MONOTONIC:
                if _has_known_subset(g, cands.groups) or ok:
                    if not ok:
                        cands.admitted_without_check.add(g)
                    cands.add(g, Provenance.DFG_PATH)
                to_expand.append(g)
            elif ok:
                cands.add(g, Provenance.DFG_PATH)
                to_expand.append(g)
            elif mode is not CheckingMode.ANTI_MONOTONIC or anti_ok:
                to_expand.append(g)
        if cut:
            cands.truncated = True
            logger.warning("DFG candidate search timed out with %d candidates", len(cands))
            break
        nxt: dict[frozenset[str], set[tuple[str, str]]] = {}
        for g in to_expand:
            for head, tail in sorted(to_check[g]):
                for succ in sorted(dfg.successors(tail)):
                    if succ not in g:
                        nxt.setdefault(g | {succ}, set()).add((head, succ))
                for pred in sorted(dfg.predecessors(head)):
                    if pred not in g:
                        nxt.setdefault(g | {pred}, set()).add((pred, tail))
        to_check = {g: ends for g, ends in nxt.items() if occurs(g, log)}
    return cands


def merge_exclusive(
    log: EventLog,
    rs: ConstraintSet,
    cands: CandidateSet,
    dfg: DFG | None = None,
) -> CandidateSet:
    """Add merges of exclusive groups that share pre- and post-sets.

    Merged groups are checked against class-based constraints only. A merge
    is further extended by the shared pre-set and/or post-set when both
    constituents extended the same way are already candidates.
    """
    dfg = dfg or compute_dfg(log)
    out = cands.copy()
    class_rs = ConstraintSet(rs.class_based)
    index = PrePostIndex(dfg, out.groups)
    seen: set[frozenset[str]] = set()

    def class_ok(g: frozenset[str]) -> bool:
        return holds_group(g, class_rs, log).ok if class_rs.constraints else True

    def add(g: frozenset[str]) -> None:
        if out.add(g, Provenance.EXCLUSIVE_MERGE):
            index.register(g)

    while True:
        pending = sorted((g for g in out.groups if g not in seen), key=group_key)
        if not pending:
            break
        g = pending[0]
        equiv = sorted(index.lookup(g) | {g}, key=group_key)
        members = set(equiv)
        stack = [(a, b) for i, a in enumerate(equiv) for b in equiv[i + 1:]]
        stack.reverse()
        while stack:
            gi, gj = stack.pop()
            if gi & gj:
                continue
            gij = gi | gj
            if gij in members or not exclusive(dfg, gi, gj) or not class_ok(gij):
                continue
            add(gij)
            pre, post = dfg.pre(gi), dfg.post(gi)
            for ext in (pre | post, pre, post):
                if ext and ext | gi in out and ext | gj in out:
                    if class_ok(ext | gij):
                        add(ext | gij)
                    break
            for gk in equiv:
                if gk not in (gi, gj):
                    stack.append((gij, gk))
            equiv.append(gij)
            members.add(gij)
        seen |= members
    return out


def compute_candidates(
    log: EventLog,
    rs: ConstraintSet,
    engine: str = "exhaustive",
    k: int | None = None,
    timeout: float | None = DEFAULT_TIMEOUT,
    *,
    threads: int = 1,
    merge: bool = True,
    evaluator: GroupEvaluator | None = None,
) -> CandidateSet:
    """Run one candidate engine (``exhaustive``, ``dfg`` or ``dfg-k``) plus merging."""
    dfg = compute_dfg(log)
    evaluator = evaluator or GroupEvaluator(log, rs.max_per_class)
    if engine in ("exhaustive", "exh"):
        cands = exhaustive_candidates(log, rs, timeout, threads=threads, evaluator=evaluator)
    elif engine in ("dfg", "dfg_unlimited"):
        cands = dfg_candidates(log, rs, None, timeout, threads=threads, evaluator=evaluator, dfg=dfg)
    elif engine in ("dfg-k", "dfg_beam"):
        cands = dfg_candidates(log, rs, k or default_beam_width(log), timeout,
                               threads=threads, evaluator=evaluator, dfg=dfg)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if merge:
        cands = merge_exclusive(log, rs, cands, dfg)
    return cands
