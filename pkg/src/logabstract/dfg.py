"""Directly-follows graphs over event classes."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import AbstractSet, Iterable, Literal

from .errors import UnknownClass
from .events import EventLog


@dataclass(frozen=True)
class DFG:
    nodes: frozenset[str]
    edges: dict[tuple[str, str], int] = field(hash=False)
    start_classes: frozenset[str] = frozenset()
    end_classes: frozenset[str] = frozenset()
    node_counts: dict[str, int] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        succ: dict[str, set[str]] = {n: set() for n in self.nodes}
        pred: dict[str, set[str]] = {n: set() for n in self.nodes}
        for (a, b), n in self.edges.items():
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a}, {b}) has an endpoint outside the node set")
            if n < 1:
                raise ValueError("edge frequencies must be >= 1")
            succ[a].add(b)
            pred[b].add(a)
        object.__setattr__(self, "_succ", {k: frozenset(v) for k, v in succ.items()})
        object.__setattr__(self, "_pred", {k: frozenset(v) for k, v in pred.items()})

    def successors(self, node: str) -> frozenset[str]:
        return self._succ[node]

    def predecessors(self, node: str) -> frozenset[str]:
        return self._pred[node]

    def pre(self, group: Iterable[str]) -> frozenset[str]:
        return pre_set(self, group)

    def post(self, group: Iterable[str]) -> frozenset[str]:
        return post_set(self, group)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def compute_dfg(log: EventLog) -> DFG:
    edges: Counter = Counter()
    starts, ends = set(), set()
    counts: Counter = Counter()
    for trace in log:
        labels = trace.labels
        counts.update(labels)
        starts.add(labels[0])
        ends.add(labels[-1])
        edges.update(zip(labels, labels[1:]))
    return DFG(
        nodes=frozenset(log.classes),
        edges=dict(edges),
        start_classes=frozenset(starts),
        end_classes=frozenset(ends),
        node_counts=dict(counts),
    )


def _check_nodes(dfg: DFG, group: AbstractSet[str]) -> None:
    unknown = set(group) - dfg.nodes
    if unknown:
        raise UnknownClass(f"classes not in DFG: {sorted(unknown)}")


def pre_set(dfg: DFG, group: Iterable[str]) -> frozenset[str]:
    """External predecessors of a group of classes."""
    group = frozenset(group)
    _check_nodes(dfg, group)
    return frozenset(p for x in group for p in dfg.predecessors(x)) - group


def post_set(dfg: DFG, group: Iterable[str]) -> frozenset[str]:
    """External successors of a group of classes."""
    group = frozenset(group)
    _check_nodes(dfg, group)
    return frozenset(s for x in group for s in dfg.successors(x)) - group


class PrePostIndex:
    """Lookup of registered class sets by their (pre-set, post-set) signature."""

    def __init__(self, dfg: DFG, groups: Iterable[frozenset[str]] = ()):
        self.dfg = dfg
        self._buckets: dict[tuple[frozenset, frozenset], set[frozenset[str]]] = {}
        for g in groups:
            self.register(g)

    def signature(self, group: frozenset[str]) -> tuple[frozenset, frozenset]:
        return pre_set(self.dfg, group), post_set(self.dfg, group)

    def register(self, group: frozenset[str]) -> None:
        self._buckets.setdefault(self.signature(group), set()).add(frozenset(group))

    def lookup(self, group: frozenset[str]) -> set[frozenset[str]]:
        group = frozenset(group)
        return self._buckets.get(self.signature(group), set()) - {group}


def equal_pre_post(dfg: DFG, group: Iterable[str], registered: Iterable[frozenset[str]]) -> set[frozenset[str]]:
    """Registered sets (other than ``group``) sharing the pre- and post-set of ``group``."""
    return PrePostIndex(dfg, registered).lookup(frozenset(group))


def exclusive(
    dfg: DFG,
    g1: Iterable[str],
    g2: Iterable[str],
    *,
    level: Literal["edge", "trace"] = "edge",
    log: EventLog | None = None,
) -> bool:
    """Whether two disjoint class sets are exclusive.

    ``level="edge"``: no DFG edge connects the sets in either direction.
    ``level="trace"``: no trace of ``log`` holds classes from both sets.
    """
    g1, g2 = frozenset(g1), frozenset(g2)
    if g1 & g2:
        raise ValueError("exclusive() requires disjoint groups")
    _check_nodes(dfg, g1 | g2)
    if level == "edge":
        for a in g1:
            if dfg.successors(a) & g2 or dfg.predecessors(a) & g2:
                return False
        return True
    if log is None:
        raise ValueError("trace-level exclusivity needs the log")
    return never_cooccur(log, g1, g2)


def never_cooccur(log: EventLog, g1: Iterable[str], g2: Iterable[str]) -> bool:
    g1, g2 = frozenset(g1), frozenset(g2)
    return not any(t.classes & g1 and t.classes & g2 for t in log)


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def filter_edges(dfg: DFG, keep_fraction: float = 1.0) -> list[tuple[tuple[str, str], int]]:
    """The ``ceil(f * |E|)`` most frequent edges; ties go to the smaller edge name."""
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must lie in (0, 1]")
    ranked = sorted(dfg.edges.items(), key=lambda kv: (-kv[1], kv[0]))
    # round() guards against 0.8 * 10 == 8.000000000000002
    n_keep = math.ceil(round(keep_fraction * len(ranked), 9))
    return sorted(ranked[:n_keep])


def to_dot(dfg: DFG, keep_fraction: float = 1.0, name: str = "dfg") -> str:
    lines = [f"digraph {_quote(name)} {{"]
    for node in sorted(dfg.nodes):
        label = f"{node} ({dfg.node_counts.get(node, 0)})"
        lines.append(f"  {_quote(node)} [label={_quote(label)}];")
    for (a, b), n in filter_edges(dfg, keep_fraction):
        lines.append(f"  {_quote(a)} -> {_quote(b)} [label={_quote(str(n))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(dfg: DFG, path, keep_fraction: float = 1.0) -> None:
    Path(path).write_text(to_dot(dfg, keep_fraction), encoding="utf-8")


_Q = r'"((?:[^"\\]|\\.)*)"'
_NODE_RE = re.compile(rf"^\s*{_Q}\s*\[label={_Q}\];\s*$")
_EDGE_RE = re.compile(rf"^\s*{_Q}\s*->\s*{_Q}\s*\[label={_Q}\];\s*$")


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


def read_dot(text: str) -> tuple[set[str], dict[tuple[str, str], int]]:
    """Parse DOT text written by :func:`to_dot` back into nodes and edges."""
    nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for line in text.splitlines():
        m = _EDGE_RE.match(line)
        if m:
            edges[(_unquote(m.group(1)), _unquote(m.group(2)))] = int(_unquote(m.group(3)))
            continue
        m = _NODE_RE.match(line)
        if m:
            nodes.add(_unquote(m.group(1)))
    return nodes, edges
