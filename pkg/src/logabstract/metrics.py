"""Quality measures for a grouping and its abstracted log."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Iterable

from .constraints import check_partition
from .dfg import compute_dfg
from .errors import TooFewGroups
from .events import EventLog


def size_reduction(grouping: Iterable[Iterable[str]], log: EventLog) -> float:
    groups = [frozenset(g) for g in grouping]
    check_partition(groups, log.classes)
    return 1.0 - len(groups) / len(log.classes)


def dfg_edge_reduction(log: EventLog, abstracted: EventLog) -> float:
    """Relative drop in directly-follows edges.

    An abstracted log without edges counts as full reduction; so does an
    original log without edges, which reports 0.0 instead.
    """
    before = compute_dfg(log).edge_count
    after = compute_dfg(abstracted).edge_count
    if before == 0:
        return 0.0
    if after == 0:
        return 1.0
    return 1.0 - after / before


def class_distances(log: EventLog) -> tuple[list[str], list[list[float]]]:
    """Average positional distance between every pair of classes.

    Per trace holding both classes, take the mean absolute ordinal difference
    over all event pairs, then average over those traces. Classes that never
    share a trace are as far apart as the longest trace.
    """
    classes = sorted(log.classes)
    idx = {c: i for i, c in enumerate(classes)}
    n = len(classes)
    sums = [[0.0] * n for _ in range(n)]
    counts = [[0] * n for _ in range(n)]
    for t in log:
        pos: dict[int, list[int]] = {}
        for e in t:
            pos.setdefault(idx[e.event_class], []).append(e.ordinal)
        for i, j in combinations(sorted(pos), 2):
            pi, pj = pos[i], pos[j]
            mean = sum(abs(a - b) for a in pi for b in pj) / (len(pi) * len(pj))
            sums[i][j] += mean
            counts[i][j] += 1
    far = float(max(len(t) for t in log))
    d = [[0.0] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        d[i][j] = d[j][i] = sums[i][j] / counts[i][j] if counts[i][j] else far
    return classes, d


def silhouette(grouping: Iterable[Iterable[str]], log: EventLog) -> float:
    """Mean silhouette of all classes under positional class distance.

    Classes in singleton groups score 0.
    """
    groups = [frozenset(g) for g in grouping]
    check_partition(groups, log.classes)
    if len(groups) < 2:
        raise TooFewGroups("silhouette needs at least two groups")
    classes, d = class_distances(log)
    idx = {c: i for i, c in enumerate(classes)}
    label = {c: k for k, g in enumerate(groups) for c in g}
    # sorted so float sums do not depend on set iteration order
    members = [sorted(idx[c] for c in g) for g in groups]
    total = 0.0
    for c in classes:
        own = label[c]
        if len(members[own]) == 1:
            continue
        i = idx[c]
        a = sum(d[i][j] for j in members[own] if j != i) / (len(members[own]) - 1)
        b = min(sum(d[i][j] for j in m) / len(m) for k, m in enumerate(members) if k != own)
        scale = max(a, b)
        total += (b - a) / scale if scale > 0 else 0.0
    return total / len(classes)


@dataclass(frozen=True)
class QualityReport:
    size_reduction: float
    dfg_edge_reduction: float
    silhouette: float | None
    group_count: int
    class_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def quality_report(grouping: Iterable[Iterable[str]], log: EventLog, abstracted: EventLog) -> QualityReport:
    groups = [frozenset(g) for g in grouping]
    try:
        sil = silhouette(groups, log)
    except TooFewGroups:
        sil = None
    return QualityReport(
        size_reduction=size_reduction(groups, log),
        dfg_edge_reduction=dfg_edge_reduction(log, abstracted),
        silhouette=sil,
        group_count=len(groups),
        class_count=len(log.classes),
    )
