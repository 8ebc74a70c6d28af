"""Rewriting low-level traces into traces of high-level activities."""

from __future__ import annotations

import enum
from typing import Iterable, Mapping

from .constraints import check_partition
from .events import Event, EventLog, Trace
from .groups import GroupInstance, inst


class AbstractionStrategy(str, enum.Enum):
    COMPLETION_ONLY = "completion_only"
    START_AND_COMPLETE = "start_and_complete"

    @classmethod
    def parse(cls, text: str) -> "AbstractionStrategy":
        aliases = {"complete": cls.COMPLETION_ONLY, "start-complete": cls.START_AND_COMPLETE}
        if text in aliases:
            return aliases[text]
        return cls(text.replace("-", "_"))


def default_names(
    grouping: Iterable[Iterable[str]],
    log: EventLog,
    attr: str | None = None,
) -> dict[frozenset[str], str]:
    """Readable activity names.

    Singletons keep their class name. A larger group is called
    ``"<value>_Activity <i>"`` when all its classes share one value of
    ``attr``, and ``"G<i>"`` otherwise. Numbers count per prefix in order of
    the group's first occurrence in the log.
    """
    groups = [frozenset(g) for g in grouping]
    first_seen = {c: i for i, c in enumerate(log.class_order())}
    ordered = sorted(groups, key=lambda g: (min(first_seen.get(c, len(first_seen)) for c in g), sorted(g)))
    counters: dict[str, int] = {}
    names: dict[frozenset[str], str] = {}
    taken = set(log.classes)
    for g in ordered:
        if len(g) == 1:
            names[g] = next(iter(g))
            continue
        prefix = None
        if attr is not None:
            values = set()
            for c in g:
                values |= log.class_attrs.get(c, {}).get(attr, frozenset())
            if len(values) == 1:
                prefix = f"{next(iter(values))}_Activity "
        prefix = prefix or "G"
        while True:
            counters[prefix] = counters.get(prefix, 0) + 1
            name = f"{prefix}{counters[prefix]}"
            if name not in taken:
                break
        taken.add(name)
        names[g] = name
    return names


def trace_instances(trace: Trace, groups: Iterable[frozenset[str]], max_per_class: int = 1) -> list[tuple[frozenset[str], GroupInstance]]:
    """All group instances of a trace, ordered by their first event."""
    out = []
    for g in groups:
        if trace.classes & g:
            out.extend((g, x) for x in inst(trace, g, max_per_class))
    out.sort(key=lambda gx: gx[1].events[0].ordinal)
    return out


def _relabel(e: Event, label: str, x: GroupInstance) -> tuple[int, str, int, dict]:
    return e.ordinal, label, e.timestamp, {"duration": x.duration, "n_events": len(x)}


def abstract_trace(
    trace: Trace,
    groups: Iterable[frozenset[str]],
    names: Mapping[frozenset[str], str],
    strategy: AbstractionStrategy = AbstractionStrategy.COMPLETION_ONLY,
    max_per_class: int = 1,
) -> Trace:
    kept = []
    for g, x in trace_instances(trace, groups, max_per_class):
        name = names[g]
        if strategy is AbstractionStrategy.COMPLETION_ONLY or len(x) == 1:
            kept.append(_relabel(x.events[-1], name, x))
        else:
            kept.append(_relabel(x.events[0], f"{name}_s", x))
            kept.append(_relabel(x.events[-1], f"{name}_c", x))
    # Instances are disjoint, so source ordinals give a strict total order.
    kept.sort(key=lambda r: r[0])
    events = tuple(Event(label, ts, attrs, i) for i, (_, label, ts, attrs) in enumerate(kept))
    return Trace(trace.id, events)


def abstract_log(
    log: EventLog,
    grouping: Iterable[Iterable[str]],
    strategy: AbstractionStrategy | str = AbstractionStrategy.COMPLETION_ONLY,
    names: Mapping[frozenset[str], str] | None = None,
    max_per_class: int = 1,
) -> EventLog:
    """Replace each group instance by one (or two) activity events.

    Raises :class:`~logabstract.errors.NotAPartition` unless ``grouping`` is
    an exact cover of the log's classes.
    """
    groups = [frozenset(g) for g in grouping]
    check_partition(groups, log.classes)
    if isinstance(strategy, str):
        strategy = AbstractionStrategy.parse(strategy)
    names = {frozenset(g): n for g, n in (names or default_names(groups, log)).items()}
    missing = [sorted(g) for g in groups if g not in names]
    if missing:
        raise ValueError(f"no activity name for groups {missing}")
    if len(set(names[g] for g in groups)) != len(groups):
        raise ValueError("activity names must be distinct")
    return EventLog(tuple(abstract_trace(t, groups, names, strategy, max_per_class) for t in log))
