"""In-memory event logs and their CSV / JSONL serialization.

An :class:`EventLog` is an immutable collection of :class:`Trace` objects, each
an ordered tuple of :class:`Event`. Attribute values are plain Python ``str``,
``int`` and ``float`` objects, plus :class:`Timestamp` for points in time.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

from .errors import EmptyLog, ParseError, UnknownClass

DEFAULT_COLUMNS = {"case": "case", "class": "class", "timestamp": "time"}

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+(?=[eE]))([eE][+-]?\d+)?$")
_ISO_RE = re.compile(r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?(Z|[+-]\d{2}:?\d{2})?$")


@dataclass(frozen=True, order=True)
class Timestamp:
    """A UTC point in time with millisecond resolution."""

    millis: int

    def __post_init__(self):
        if self.millis < 0:
            raise ValueError("timestamps must be non-negative")

    def isoformat(self) -> str:
        return format_millis(self.millis)

    def __str__(self):
        return self.isoformat()


AttributeValue = Union[str, int, float, Timestamp]


def parse_iso(text: str) -> int:
    """Parse an ISO-8601 string into epoch milliseconds (naive times are UTC)."""
    if text.endswith("Z") or text.endswith("z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
    return (delta.days * 86_400 + delta.seconds) * 1000 + delta.microseconds // 1000


def format_millis(millis: int) -> str:
    seconds, ms = divmod(millis, 1000)
    dt = datetime.fromtimestamp(seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{ms:03d}Z"


def parse_time(value: Any) -> int:
    """Parse a required timestamp cell: epoch-millis integer or ISO-8601."""
    if isinstance(value, bool):
        raise ValueError(f"unparseable timestamp {value!r}")
    if isinstance(value, int):
        millis = value
    elif isinstance(value, float) and value.is_integer():
        millis = int(value)
    elif isinstance(value, str):
        text = value.strip()
        if _INT_RE.match(text):
            millis = int(text)
        elif _ISO_RE.match(text):
            millis = parse_iso(text)
        else:
            raise ValueError(f"unparseable timestamp {value!r}")
    else:
        raise ValueError(f"unparseable timestamp {value!r}")
    if millis < 0:
        raise ValueError(f"negative timestamp {value!r}")
    return millis


def infer_value(text: str) -> AttributeValue:
    """Infer the tag of an untyped (CSV) attribute cell."""
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    if _ISO_RE.match(text):
        try:
            return Timestamp(parse_iso(text))
        except ValueError:
            return text
    return text


def render_value(value: AttributeValue) -> str:
    if isinstance(value, Timestamp):
        return value.isoformat()
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Event:
    event_class: str
    timestamp: int
    attrs: Mapping[str, AttributeValue] = field(default_factory=dict, hash=False)
    ordinal: int = 0

    def get(self, attr: str, default=None):
        return self.attrs.get(attr, default)


@dataclass(frozen=True)
class Trace:
    id: str
    events: tuple[Event, ...]

    def __post_init__(self):
        if not self.events:
            raise ValueError(f"trace {self.id!r} is empty")
        for i, e in enumerate(self.events):
            if e.ordinal != i:
                raise ValueError(f"trace {self.id!r}: ordinals must be consecutive from 0")

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.event_class for e in self.events)

    @cached_property
    def classes(self) -> frozenset[str]:
        return frozenset(self.labels)


@dataclass(frozen=True)
class EventLog:
    """An immutable event log; traces keep their first-appearance order."""

    traces: tuple[Trace, ...]

    def __post_init__(self):
        ids = [t.id for t in self.traces]
        if len(set(ids)) != len(ids):
            raise ValueError("trace ids must be unique")

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, str, int, Mapping[str, AttributeValue]]]) -> "EventLog":
        """Build a log from ``(case, class, timestamp_ms, attrs)`` records.

        Events are sorted per trace by timestamp; ties keep input order.
        """
        grouped: dict[str, list] = {}
        for case, label, ts, attrs in records:
            grouped.setdefault(str(case), []).append((label, ts, dict(attrs)))
        traces = []
        for case, rows in grouped.items():
            rows = sorted(rows, key=lambda r: r[1])  # stable
            events = tuple(Event(label, ts, attrs, i) for i, (label, ts, attrs) in enumerate(rows))
            traces.append(Trace(case, events))
        if not traces:
            raise EmptyLog("log contains no events")
        return cls(tuple(traces))

    @classmethod
    def from_sequences(
        cls,
        sequences: Mapping[str, Sequence[str]] | Sequence[Sequence[str]],
        attrs: Mapping[str, Mapping[str, AttributeValue]] | None = None,
        step_ms: int = 60_000,
    ) -> "EventLog":
        """Convenience constructor from plain class-label sequences.

        ``attrs`` maps a class name to attributes copied onto each of its events.
        Timestamps advance by ``step_ms`` per event within a trace.
        """
        if not isinstance(sequences, Mapping):
            sequences = {str(i + 1): seq for i, seq in enumerate(sequences)}
        attrs = attrs or {}
        records = [
            (case, label, i * step_ms, attrs.get(label, {}))
            for case, seq in sequences.items()
            for i, label in enumerate(seq)
        ]
        return cls.from_records(records)

    def __iter__(self):
        return iter(self.traces)

    def __len__(self):
        return len(self.traces)

    @cached_property
    def by_id(self) -> dict[str, Trace]:
        return {t.id: t for t in self.traces}

    @cached_property
    def classes(self) -> frozenset[str]:
        return frozenset(e.event_class for t in self.traces for e in t)

    @cached_property
    def class_attrs(self) -> dict[str, dict[str, frozenset]]:
        acc: dict[str, dict[str, set]] = defaultdict(lambda: defaultdict(set))
        for t in self.traces:
            for e in t:
                slot = acc[e.event_class]
                for k, v in e.attrs.items():
                    slot[k].add(v)
        return {c: {k: frozenset(v) for k, v in d.items()} for c, d in acc.items()}

    @cached_property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(sorted({k for t in self.traces for e in t for k in e.attrs}))

    @property
    def n_events(self) -> int:
        return sum(len(t) for t in self.traces)

    def class_order(self) -> list[str]:
        """Classes in order of first occurrence in the log."""
        seen: dict[str, None] = {}
        for t in self.traces:
            for e in t:
                seen.setdefault(e.event_class)
        return list(seen)


def class_attribute(log: EventLog, event_class: str, attr: str) -> frozenset:
    """Distinct values of ``attr`` over all events of ``event_class``."""
    if event_class not in log.classes:
        raise UnknownClass(f"unknown event class {event_class!r}")
    return log.class_attrs.get(event_class, {}).get(attr, frozenset())


def _detect_format(path: Path, fmt: str | None) -> str:
    if fmt:
        fmt = fmt.lower()
    else:
        fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson", ".json") else "csv"
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unsupported log format {fmt!r}")
    return fmt


def load_log(path, format: str | None = None, column_map: Mapping[str, str] | None = None) -> EventLog:
    """Read an event log from a CSV or JSONL file.

    ``column_map`` maps the keys ``case``, ``class`` and ``timestamp`` to the
    column names used in the file. Every other column becomes an event
    attribute; empty CSV cells and JSON ``null`` are treated as absent.
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    cols = dict(DEFAULT_COLUMNS)
    if column_map:
        cols.update({k: v for k, v in column_map.items() if v})
    case_col, class_col, time_col = cols["case"], cols["class"], cols["timestamp"]
    required = (case_col, class_col, time_col)

    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise EmptyLog(f"{path}: no header row")
            missing = [c for c in required if c not in reader.fieldnames]
            if missing:
                raise ParseError(f"missing required column(s) {missing}", row=1)
            for rowno, row in enumerate(reader, start=2):
                if None in row or any(v is None for v in row.values()):
                    raise ParseError("wrong number of fields", row=rowno)
                records.append(_record(row, rowno, case_col, class_col, time_col, infer=True))
        else:
            for rowno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid JSON: {exc.msg}", row=rowno) from None
                if not isinstance(obj, dict):
                    raise ParseError("expected a JSON object", row=rowno)
                records.append(_record(obj, rowno, case_col, class_col, time_col, infer=False))
    if not records:
        raise EmptyLog(f"{path}: log contains no events")
    return EventLog.from_records(records)


def _record(row: Mapping[str, Any], rowno: int, case_col, class_col, time_col, infer: bool):
    for col in (case_col, class_col, time_col):
        if row.get(col) in (None, ""):
            raise ParseError(f"missing value for required column {col!r}", row=rowno)
    label = row[class_col]
    if not isinstance(label, str):
        label = str(label)
    try:
        ts = parse_time(row[time_col])
    except ValueError as exc:
        raise ParseError(str(exc), row=rowno) from None
    attrs: dict[str, AttributeValue] = {}
    for key, value in row.items():
        if key in (case_col, class_col, time_col) or value is None or value == "":
            continue
        if infer:
            attrs[key] = infer_value(value)
        elif isinstance(value, bool) or not isinstance(value, (str, int, float)):
            raise ParseError(f"unsupported value for attribute {key!r}: {value!r}", row=rowno)
        elif isinstance(value, str) and _ISO_RE.match(value):
            try:
                attrs[key] = Timestamp(parse_iso(value))
            except ValueError:
                attrs[key] = value
        else:
            attrs[key] = value
    return str(row[case_col]), label, ts, attrs


def write_log(log: EventLog, path, format: str | None = None) -> None:
    """Write ``log`` so that :func:`load_log` reads back an equal log.

    CSV cells carry no type tag, so string attributes that look like numbers
    or ISO timestamps come back as numbers or timestamps; JSONL keeps them.
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    if fmt == "csv":
        names = list(log.attribute_names)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["case", "class", "time", *names])
            for t in log:
                for e in t:
                    row = [t.id, e.event_class, format_millis(e.timestamp)]
                    row += [render_value(e.attrs[n]) if n in e.attrs else "" for n in names]
                    writer.writerow(row)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            for t in log:
                for e in t:
                    obj: dict[str, Any] = {"case": t.id, "class": e.event_class, "time": format_millis(e.timestamp)}
                    for k in sorted(e.attrs):
                        v = e.attrs[k]
                        if isinstance(v, Timestamp):
                            v = v.isoformat()
                        elif isinstance(v, float) and not math.isfinite(v):
                            v = repr(v)
                        obj[k] = v
                    fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=False) + "\n")
