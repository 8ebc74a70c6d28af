"""Group instances within traces and the group distance function.

A group is a ``frozenset`` of event-class names. Its instances in a trace are
obtained by projecting the trace onto the group's classes and cutting the
projection whenever a class would occur more than ``max_per_class`` times in
the current instance.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import NoInstances, UnknownClass
from .events import Event, EventLog, Trace

Group = frozenset


@dataclass(frozen=True)
class GroupInstance:
    trace_id: str
    events: tuple[Event, ...]

    def __len__(self):
        return len(self.events)

    @property
    def span(self) -> tuple[int, int]:
        return self.events[0].ordinal, self.events[-1].ordinal

    @property
    def classes(self) -> frozenset[str]:
        return frozenset(e.event_class for e in self.events)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.event_class for e in self.events)

    @property
    def duration(self) -> int:
        return self.events[-1].timestamp - self.events[0].timestamp


def inst(trace: Trace, group: Iterable[str], max_per_class: int = 1) -> list[GroupInstance]:
    group = frozenset(group)
    if max_per_class < 1:
        raise ValueError("max_per_class must be >= 1")
    instances: list[GroupInstance] = []
    current: list[Event] = []
    counts: Counter = Counter()
    for e in trace:
        c = e.event_class
        if c not in group:
            continue
        if counts[c] >= max_per_class:
            instances.append(GroupInstance(trace.id, tuple(current)))
            current = []
            counts.clear()
        current.append(e)
        counts[c] += 1
    if current:
        instances.append(GroupInstance(trace.id, tuple(current)))
    return instances


def log_instances(log: EventLog, group: Iterable[str], max_per_class: int = 1) -> list[GroupInstance]:
    group = frozenset(group)
    return [x for t in log if t.classes & group for x in inst(t, group, max_per_class)]


def interrupts(instance: GroupInstance, trace: Trace | None = None) -> int:
    """Foreign events strictly inside the instance's span."""
    first, last = instance.span
    if trace is not None and trace.id != instance.trace_id:
        raise ValueError("instance does not belong to this trace")
    return (last - first + 1) - len(instance.events)


def missing(instance: GroupInstance, group: Iterable[str]) -> int:
    group = frozenset(group)
    present = instance.classes
    if not present <= group:
        raise ValueError("instance holds classes outside the group")
    return len(group) - len(present)


def _instance_term(x: GroupInstance, size: int) -> float:
    return interrupts(x) / len(x) + (size - len(x.classes)) / size + 1 / size


def group_distance(group: Iterable[str], log: EventLog, max_per_class: int = 1) -> float:
    group = frozenset(group)
    if not group:
        raise ValueError("group must be non-empty")
    unknown = group - log.classes
    if unknown:
        raise UnknownClass(f"unknown classes {sorted(unknown)}")
    instances = log_instances(log, group, max_per_class)
    if not instances:
        raise NoInstances(f"group {sorted(group)} never occurs")
    size = len(group)
    return sum(_instance_term(x, size) for x in instances) / len(instances)


def grouping_distance(grouping: Iterable[Iterable[str]], log: EventLog, max_per_class: int = 1) -> float:
    groups = [frozenset(g) for g in grouping]
    if not groups:
        raise ValueError("empty grouping does not cover the log")
    return sum(group_distance(g, log, max_per_class) for g in groups)


def occurs(group: Iterable[str], log: EventLog) -> bool:
    """True iff some trace holds at least one event of every class in ``group``."""
    group = frozenset(group)
    if not group:
        raise ValueError("group must be non-empty")
    return any(group <= t.classes for t in log)


class GroupEvaluator:
    """Per-log cache of instances and distances, safe for concurrent use."""

    def __init__(self, log: EventLog, max_per_class: int = 1):
        self.log = log
        self.max_per_class = max_per_class
        self._instances: dict[frozenset, list[GroupInstance]] = {}
        self._distances: dict[frozenset, float] = {}
        self._lock = threading.Lock()

    def instances(self, group: frozenset[str]) -> list[GroupInstance]:
        group = frozenset(group)
        cached = self._instances.get(group)
        if cached is None:
            cached = log_instances(self.log, group, self.max_per_class)
            with self._lock:
                cached = self._instances.setdefault(group, cached)
        return cached

    def distance(self, group: frozenset[str]) -> float:
        group = frozenset(group)
        cached = self._distances.get(group)
        if cached is None:
            xs = self.instances(group)
            if not xs:
                raise NoInstances(f"group {sorted(group)} never occurs")
            size = len(group)
            cached = sum(_instance_term(x, size) for x in xs) / len(xs)
            with self._lock:
                cached = self._distances.setdefault(group, cached)
        return cached

    def occurs(self, group: frozenset[str]) -> bool:
        return occurs(group, self.log)
