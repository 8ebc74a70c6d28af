"""Declarative constraints on groupings, groups and group instances.

Constraint documents are line oriented::

    # anything after '#' is a comment
    grouping count <= 3
    class count >= 2
    class cannot-link rcp acc
    class must-link inf arv
    class distinct(origin) <= 1
    instance distinct(role) <= 1
    instance sum(cost) <= 500
    instance avg(duration) >= 10
    instance duration <= 3600          # seconds
    instance maxgap <= 600             # seconds
    instance perclass <= 2
    atleast 0.95: instance sum(cost) <= 500

Names and attributes may be double-quoted when they contain spaces.
"""

from __future__ import annotations

import enum
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConstraintSyntaxError, NotAPartition, SemanticError, UnknownClass
from .events import EventLog, Timestamp
from .groups import GroupEvaluator, GroupInstance

logger = logging.getLogger(__name__)


class Scope(str, enum.Enum):
    GROUPING = "grouping"
    CLASS_BASED = "class_based"
    INSTANCE_BASED = "instance_based"


class Monotonicity(str, enum.Enum):
    MONOTONIC = "monotonic"
    ANTI_MONOTONIC = "anti_monotonic"
    NON_MONOTONIC = "non_monotonic"
    NOT_APPLICABLE = "not_applicable"


class CheckingMode(str, enum.Enum):
    MONOTONIC = "monotonic"
    ANTI_MONOTONIC = "anti_monotonic"
    NON_MONOTONIC = "non_monotonic"


class Kind(str, enum.Enum):
    GROUP_COUNT_MAX = "group_count_max"
    GROUP_COUNT_MIN = "group_count_min"
    CLASS_COUNT_MIN = "class_count_min"
    CLASS_COUNT_MAX = "class_count_max"
    CANNOT_LINK = "cannot_link"
    MUST_LINK = "must_link"
    CLASS_ATTR_DISTINCT_MAX = "class_attr_distinct_max"
    INSTANCE_DISTINCT_MIN = "instance_distinct_min"
    INSTANCE_DISTINCT_MAX = "instance_distinct_max"
    INSTANCE_SUM_MIN = "instance_sum_min"
    INSTANCE_SUM_MAX = "instance_sum_max"
    INSTANCE_AVG_MIN = "instance_avg_min"
    INSTANCE_AVG_MAX = "instance_avg_max"
    INSTANCE_MAX_GAP = "instance_max_gap"
    INSTANCE_DURATION_MAX = "instance_duration_max"
    INSTANCE_CLASS_CARDINALITY_MAX = "instance_class_cardinality_max"
    COVERAGE_FRACTION = "coverage_fraction"


K = Kind
_GROUPING_KINDS = {K.GROUP_COUNT_MAX, K.GROUP_COUNT_MIN}
_CLASS_KINDS = {K.CLASS_COUNT_MIN, K.CLASS_COUNT_MAX, K.CANNOT_LINK, K.MUST_LINK, K.CLASS_ATTR_DISTINCT_MAX}
_ATTR_KINDS = {
    K.CLASS_ATTR_DISTINCT_MAX, K.INSTANCE_DISTINCT_MIN, K.INSTANCE_DISTINCT_MAX,
    K.INSTANCE_SUM_MIN, K.INSTANCE_SUM_MAX, K.INSTANCE_AVG_MIN, K.INSTANCE_AVG_MAX,
}
_NUMERIC_KINDS = {K.INSTANCE_SUM_MIN, K.INSTANCE_SUM_MAX, K.INSTANCE_AVG_MIN, K.INSTANCE_AVG_MAX}
# Instance measures that only grow when events are added to an instance.
_GROWING_MAX = {K.INSTANCE_DISTINCT_MAX, K.INSTANCE_SUM_MAX, K.INSTANCE_DURATION_MAX}
_GROWING_MIN = {K.INSTANCE_DISTINCT_MIN, K.INSTANCE_SUM_MIN}

_DECLARED = {
    K.CLASS_COUNT_MIN: Monotonicity.MONOTONIC,
    K.INSTANCE_DISTINCT_MIN: Monotonicity.MONOTONIC,
    K.INSTANCE_SUM_MIN: Monotonicity.MONOTONIC,
    K.CLASS_COUNT_MAX: Monotonicity.ANTI_MONOTONIC,
    K.CANNOT_LINK: Monotonicity.ANTI_MONOTONIC,
    K.CLASS_ATTR_DISTINCT_MAX: Monotonicity.ANTI_MONOTONIC,
    K.INSTANCE_DISTINCT_MAX: Monotonicity.ANTI_MONOTONIC,
    K.INSTANCE_SUM_MAX: Monotonicity.ANTI_MONOTONIC,
    K.INSTANCE_MAX_GAP: Monotonicity.ANTI_MONOTONIC,
    K.INSTANCE_DURATION_MAX: Monotonicity.ANTI_MONOTONIC,
    K.INSTANCE_CLASS_CARDINALITY_MAX: Monotonicity.ANTI_MONOTONIC,
    K.MUST_LINK: Monotonicity.NON_MONOTONIC,
    K.INSTANCE_AVG_MAX: Monotonicity.NON_MONOTONIC,
    K.INSTANCE_AVG_MIN: Monotonicity.NON_MONOTONIC,
}


@dataclass(frozen=True)
class Constraint:
    kind: Kind
    bound: float | None = None
    attr: str | None = None
    classes: tuple[str, str] | None = None
    inner: "Constraint | None" = None

    @property
    def scope(self) -> Scope:
        if self.kind in _GROUPING_KINDS:
            return Scope.GROUPING
        if self.kind in _CLASS_KINDS:
            return Scope.CLASS_BASED
        return Scope.INSTANCE_BASED

    @property
    def fraction(self) -> float | None:
        return self.bound if self.kind is K.COVERAGE_FRACTION else None

    @property
    def attribute(self) -> str | None:
        return self.inner.attribute if self.kind is K.COVERAGE_FRACTION else self.attr

    def __str__(self):
        return render(self)


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _name(s: str) -> str:
    return s if re.fullmatch(r"[^\s()<>=:#\"]+", s) else '"' + s.replace('"', '\\"') + '"'


def render(c: Constraint) -> str:
    """Render a constraint back to document syntax."""
    k = c.kind
    if k is K.GROUP_COUNT_MAX:
        return f"grouping count <= {_num(c.bound)}"
    if k is K.GROUP_COUNT_MIN:
        return f"grouping count >= {_num(c.bound)}"
    if k is K.CLASS_COUNT_MAX:
        return f"class count <= {_num(c.bound)}"
    if k is K.CLASS_COUNT_MIN:
        return f"class count >= {_num(c.bound)}"
    if k is K.CANNOT_LINK:
        return f"class cannot-link {_name(c.classes[0])} {_name(c.classes[1])}"
    if k is K.MUST_LINK:
        return f"class must-link {_name(c.classes[0])} {_name(c.classes[1])}"
    if k is K.CLASS_ATTR_DISTINCT_MAX:
        return f"class distinct({_name(c.attr)}) <= {_num(c.bound)}"
    if k is K.INSTANCE_MAX_GAP:
        return f"instance maxgap <= {_num(c.bound)}"
    if k is K.INSTANCE_DURATION_MAX:
        return f"instance duration <= {_num(c.bound)}"
    if k is K.INSTANCE_CLASS_CARDINALITY_MAX:
        return f"instance perclass <= {_num(c.bound)}"
    if k is K.COVERAGE_FRACTION:
        return f"atleast {_num(c.bound)}: {render(c.inner)}"
    agg, op = k.value.split("_")[1:]
    return f"instance {agg}({_name(c.attr)}) {'<=' if op == 'max' else '>='} {_num(c.bound)}"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[Constraint, ...] = ()

    def __iter__(self) -> Iterator[Constraint]:
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    @property
    def grouping(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if c.scope is Scope.GROUPING)

    @property
    def class_based(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if c.scope is Scope.CLASS_BASED)

    @property
    def instance_based(self) -> tuple[Constraint, ...]:
        return tuple(c for c in self.constraints if c.scope is Scope.INSTANCE_BASED)

    @property
    def per_group(self) -> tuple[Constraint, ...]:
        """Class-based then instance-based constraints (R minus R_G)."""
        return self.class_based + self.instance_based

    @property
    def max_per_class(self) -> int:
        """Occurrences of one class allowed per instance; drives instance splitting."""
        bounds = [c.bound for c in self.constraints if c.kind is K.INSTANCE_CLASS_CARDINALITY_MAX]
        return max(1, int(min(bounds))) if bounds else 1

    def group_count_bounds(self) -> tuple[int | None, int | None]:
        """``(max_groups, min_groups)`` implied by the grouping constraints."""
        hi = [int(c.bound) for c in self.grouping if c.kind is K.GROUP_COUNT_MAX]
        lo = [int(math.ceil(c.bound)) for c in self.grouping if c.kind is K.GROUP_COUNT_MIN]
        return (min(hi) if hi else None, max(lo) if lo else None)

    def without_grouping(self) -> "ConstraintSet":
        return ConstraintSet(self.per_group)

    def subset(self, constraints: Iterable[Constraint]) -> "ConstraintSet":
        return ConstraintSet(tuple(constraints))

    def __str__(self):
        return "\n".join(render(c) for c in self.constraints)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r'\s*(?:(<=|>=|[():])|"((?:[^"\\]|\\.)*)"|([^\s()<>=:#"]+))')


@dataclass
class _Tok:
    text: str
    col: int
    quoted: bool = False


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(line, pos)
        if not m or m.end() == pos:
            col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
            raise ConstraintSyntaxError(f"unexpected character {line[col - 1]!r}", lineno, col)
        if m.group(1):
            toks.append(_Tok(m.group(1), m.start(1) + 1))
        elif m.group(2) is not None:
            toks.append(_Tok(re.sub(r"\\(.)", r"\1", m.group(2)), m.start(2), quoted=True))
        else:
            toks.append(_Tok(m.group(3), m.start(3) + 1))
        pos = m.end()
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int, width: int):
        self.toks, self.i, self.lineno, self.width = toks, 0, lineno, width

    def error(self, msg: str, tok: _Tok | None = None) -> ConstraintSyntaxError:
        col = tok.col if tok else (self.toks[self.i].col if self.i < len(self.toks) else self.width + 1)
        return ConstraintSyntaxError(msg, self.lineno, col)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of line")
        self.i += 1
        return tok

    def expect(self, *words: str) -> _Tok:
        tok = self.next(" or ".join(repr(w) for w in words))
        if tok.quoted or tok.text not in words:
            raise self.error(f"expected {' or '.join(repr(w) for w in words)}, found {tok.text!r}", tok)
        return tok

    def name(self, what: str) -> str:
        tok = self.next(what)
        if not tok.quoted and tok.text in ("(", ")", ":", "<=", ">="):
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok.text

    def number(self, integer: bool = False) -> float:
        tok = self.next("a number")
        try:
            if integer:
                if not re.fullmatch(r"[+-]?\d+", tok.text):
                    raise ValueError
                return int(tok.text)
            value = float(tok.text)
            if not math.isfinite(value):
                raise ValueError
            return value
        except ValueError:
            kind = "an integer" if integer else "a number"
            raise self.error(f"expected {kind}, found {tok.text!r}", tok) from None

    def end(self):
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected trailing token {tok.text!r}", tok)


def _parse_instance(p: _Line) -> Constraint:
    tok = p.expect("distinct", "sum", "avg", "duration", "maxgap", "perclass")
    word = tok.text
    if word in ("distinct", "sum", "avg"):
        p.expect("(")
        attr = p.name("an attribute name")
        p.expect(")")
        op = p.expect("<=", ">=").text
        value = p.number()
        kind = Kind(f"instance_{word}_{'max' if op == '<=' else 'min'}")
        return Constraint(kind, bound=value, attr=attr)
    p.expect("<=")
    if word == "perclass":
        return Constraint(K.INSTANCE_CLASS_CARDINALITY_MAX, bound=p.number(integer=True))
    kind = K.INSTANCE_DURATION_MAX if word == "duration" else K.INSTANCE_MAX_GAP
    return Constraint(kind, bound=p.number())


def _parse_line(p: _Line) -> Constraint:
    head = p.expect("grouping", "class", "instance", "atleast")
    if head.text == "grouping":
        p.expect("count")
        op = p.expect("<=", ">=").text
        n = p.number(integer=True)
        return Constraint(K.GROUP_COUNT_MAX if op == "<=" else K.GROUP_COUNT_MIN, bound=n)
    if head.text == "class":
        tok = p.expect("count", "cannot-link", "must-link", "distinct")
        if tok.text == "count":
            op = p.expect("<=", ">=").text
            n = p.number(integer=True)
            return Constraint(K.CLASS_COUNT_MAX if op == "<=" else K.CLASS_COUNT_MIN, bound=n)
        if tok.text in ("cannot-link", "must-link"):
            a = p.name("an event class")
            b = p.name("an event class")
            return Constraint(K.CANNOT_LINK if tok.text == "cannot-link" else K.MUST_LINK, classes=(a, b))
        p.expect("(")
        attr = p.name("an attribute name")
        p.expect(")")
        p.expect("<=")
        return Constraint(K.CLASS_ATTR_DISTINCT_MAX, bound=p.number(integer=True), attr=attr)
    if head.text == "instance":
        return _parse_instance(p)
    q = p.number()
    p.expect(":")
    tok = p.peek()
    if tok is not None and not tok.quoted and tok.text == "instance":
        p.next("instance")
    return Constraint(K.COVERAGE_FRACTION, bound=q, inner=_parse_instance(p))


def _check_semantics(c: Constraint, lineno: int) -> None:
    if c.kind is K.COVERAGE_FRACTION:
        if not 0 < c.bound <= 1:
            raise SemanticError(f"line {lineno}: coverage fraction must lie in (0, 1], got {c.bound}")
        if c.inner.kind is K.INSTANCE_CLASS_CARDINALITY_MAX:
            raise SemanticError(f"line {lineno}: 'perclass' is enforced by instance splitting and cannot be relaxed")
        _check_semantics(c.inner, lineno)
        return
    if c.kind is K.CANNOT_LINK and c.classes[0] == c.classes[1]:
        raise SemanticError(f"line {lineno}: a class cannot be cannot-linked with itself")
    if c.kind in (K.INSTANCE_SUM_MIN, K.INSTANCE_SUM_MAX, K.INSTANCE_AVG_MIN, K.INSTANCE_AVG_MAX):
        return  # sign of sums and averages is checked against the log
    if c.bound is not None and c.bound < 0:
        raise SemanticError(f"line {lineno}: bound must be non-negative, got {_num(c.bound)}")
    if c.kind is K.INSTANCE_CLASS_CARDINALITY_MAX and c.bound < 1:
        raise SemanticError(f"line {lineno}: perclass bound must be at least 1")


def parse_constraints(source: str | Path) -> ConstraintSet:
    """Parse a constraint document given as text or as a path to a file."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    else:
        text = source
    constraints = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        p = _Line(_tokenize(line, lineno), lineno, len(line))
        c = _parse_line(p)
        p.end()
        _check_semantics(c, lineno)
        constraints.append(c)
    return ConstraintSet(tuple(constraints))


def load_constraints(path) -> ConstraintSet:
    return parse_constraints(Path(path))


def _strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"' and (i == 0 or line[i - 1] != "\\"):
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


# ---------------------------------------------------------------------------
# monotonicity
# ---------------------------------------------------------------------------


def monotonicity(c: Constraint) -> Monotonicity:
    """Declared monotonicity class of a constraint."""
    if c.scope is Scope.GROUPING:
        return Monotonicity.NOT_APPLICABLE
    if c.kind is K.COVERAGE_FRACTION:
        inner = monotonicity(c.inner)
        return Monotonicity.ANTI_MONOTONIC if inner is Monotonicity.ANTI_MONOTONIC else Monotonicity.NON_MONOTONIC
    return _DECLARED[c.kind]


@dataclass(frozen=True)
class LogShape:
    """Log facts that decide whether declared monotonicity is exact."""

    split_free: bool          # no instance of any group is ever split
    complete: bool            # every trace holds every class
    attrs_everywhere: frozenset[str]  # attributes observed on some event of every class

    @classmethod
    def of(cls, log: EventLog, max_per_class: int = 1) -> "LogShape":
        split_free = all(
            max(Counter(t.labels).values()) <= max_per_class for t in log
        )
        complete = all(t.classes == log.classes for t in log)
        everywhere = None
        for c in log.classes:
            names = set(log.class_attrs.get(c, {}))
            everywhere = names if everywhere is None else everywhere & names
        return cls(split_free, complete, frozenset(everywhere or ()))


def effective_monotonicity(c: Constraint, shape: LogShape) -> Monotonicity:
    """Monotonicity that provably holds on a log of the given shape.

    Declared classes of instance-based constraints are only exact under
    extra conditions; where those fail the constraint is treated as
    non-monotonic so that search pruning never drops a valid group.
    """
    declared = monotonicity(c)
    if c.scope is not Scope.INSTANCE_BASED or declared is Monotonicity.NON_MONOTONIC:
        return declared
    if c.kind is K.INSTANCE_CLASS_CARDINALITY_MAX:
        return declared  # holds by construction of the instances
    attr_ok = c.attr is None or c.attr in shape.attrs_everywhere
    if c.kind in _GROWING_MAX and shape.split_free and attr_ok:
        return declared
    if c.kind in _GROWING_MIN and shape.split_free and shape.complete:
        return declared
    # maxgap shrinks when events are inserted; coverage fractions change their
    # denominator when the group gains instances.
    return Monotonicity.NON_MONOTONIC


def checking_mode(rs: ConstraintSet, log: EventLog | None = None) -> CheckingMode:
    """Pruning mode for candidate search.

    Without a log, the declared monotonicity classes are used. With a log,
    only classes that are exact on that log count.
    """
    if log is None:
        classes = [monotonicity(c) for c in rs.per_group]
    else:
        shape = LogShape.of(log, rs.max_per_class)
        classes = [effective_monotonicity(c, shape) for c in rs.per_group]
    if any(m is Monotonicity.ANTI_MONOTONIC for m in classes):
        return CheckingMode.ANTI_MONOTONIC
    if all(m is Monotonicity.MONOTONIC for m in classes):
        return CheckingMode.MONOTONIC
    return CheckingMode.NON_MONOTONIC


def anti_monotonic_part(rs: ConstraintSet, log: EventLog | None = None) -> ConstraintSet:
    if log is None:
        keep = [c for c in rs.per_group if monotonicity(c) is Monotonicity.ANTI_MONOTONIC]
    else:
        shape = LogShape.of(log, rs.max_per_class)
        keep = [c for c in rs.per_group if effective_monotonicity(c, shape) is Monotonicity.ANTI_MONOTONIC]
    return ConstraintSet(tuple(keep))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    constraint: Constraint
    message: str
    violating: int = 0
    total: int = 0
    classes: tuple[str, ...] = ()

    @property
    def fraction(self) -> float:
        return self.violating / self.total if self.total else 1.0

    def to_dict(self) -> dict:
        return {
            "constraint": render(self.constraint),
            "scope": self.constraint.scope.value,
            "message": self.message,
            "violating_instances": self.violating,
            "total_instances": self.total,
            "violating_fraction": self.fraction if self.constraint.scope is Scope.INSTANCE_BASED else None,
            "classes": list(self.classes),
        }


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    violations: tuple[Violation, ...] = ()
    checked: int = 0

    def __bool__(self):
        return self.ok


def validate_against_log(rs: ConstraintSet, log: EventLog) -> None:
    """Reject constraints whose aggregates make no sense on this log."""
    for c in rs:
        target = c.inner if c.kind is K.COVERAGE_FRACTION else c
        if target.kind not in _NUMERIC_KINDS:
            continue
        values = [v for attrs in log.class_attrs.values() for v in attrs.get(target.attr, ())]
        bad = [v for v in values if isinstance(v, (str, Timestamp)) or isinstance(v, bool)]
        if bad:
            raise SemanticError(f"{render(c)}: attribute {target.attr!r} has non-numeric values such as {bad[0]!r}")
        if target.kind in (K.INSTANCE_SUM_MIN, K.INSTANCE_SUM_MAX) and any(v < 0 for v in values):
            raise SemanticError(f"{render(c)}: attribute {target.attr!r} takes negative values; sums over it are not monotone")


def _class_check(c: Constraint, g: frozenset[str], log: EventLog) -> bool:
    k = c.kind
    if k is K.CLASS_COUNT_MIN:
        return len(g) >= c.bound
    if k is K.CLASS_COUNT_MAX:
        return len(g) <= c.bound
    if k is K.CANNOT_LINK:
        return not (c.classes[0] in g and c.classes[1] in g)
    if k is K.MUST_LINK:
        return (c.classes[0] in g) == (c.classes[1] in g)
    if k is K.CLASS_ATTR_DISTINCT_MAX:
        values = set()
        for cls in g:
            values |= log.class_attrs.get(cls, {}).get(c.attr, frozenset())
        return len(values) <= c.bound
    raise ValueError(f"not a class-based constraint: {c}")


def _numeric(values: list, c: Constraint) -> list[float]:
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SemanticError(f"{render(c)}: non-numeric value {v!r} for {c.attr!r}")
    return values


def instance_holds(c: Constraint, x: GroupInstance) -> bool:
    """Evaluate one instance-based constraint on one group instance."""
    k = c.kind
    if k is K.INSTANCE_DURATION_MAX:
        return x.duration <= c.bound * 1000
    if k is K.INSTANCE_MAX_GAP:
        ts = [e.timestamp for e in x.events]
        gap = max((b - a for a, b in zip(ts, ts[1:])), default=0)
        return gap <= c.bound * 1000
    if k is K.INSTANCE_CLASS_CARDINALITY_MAX:
        return max(Counter(x.labels).values()) <= c.bound
    values = [e.attrs[c.attr] for e in x.events if c.attr in e.attrs]
    if k is K.INSTANCE_DISTINCT_MIN:
        return bool(values) and len(set(values)) >= c.bound
    if k is K.INSTANCE_DISTINCT_MAX:
        return len(set(values)) <= c.bound
    if k in (K.INSTANCE_SUM_MIN, K.INSTANCE_AVG_MIN):
        if not values:
            return False
        nums = _numeric(values, c)
        agg = sum(nums) if k is K.INSTANCE_SUM_MIN else sum(nums) / len(nums)
        return agg >= c.bound
    if k in (K.INSTANCE_SUM_MAX, K.INSTANCE_AVG_MAX):
        if not values:
            return True
        nums = _numeric(values, c)
        agg = sum(nums) if k is K.INSTANCE_SUM_MAX else sum(nums) / len(nums)
        return agg <= c.bound
    raise ValueError(f"not an instance-level constraint: {c}")


def _attr_known(c: Constraint, g: frozenset[str], log: EventLog) -> bool:
    attr = c.attribute
    if attr is None:
        return True
    return any(attr in log.class_attrs.get(cls, {}) for cls in g)


def _instance_check(c: Constraint, g: frozenset[str], log: EventLog, instances) -> Violation | None:
    total = len(instances)
    if not _attr_known(c, g, log):
        return Violation(c, f"attribute {c.attribute!r} never observed on classes of the group",
                         total, total, tuple(sorted(g)))
    if c.kind is K.COVERAGE_FRACTION:
        bad = sum(1 for x in instances if not instance_holds(c.inner, x))
        if total and (total - bad) / total < c.bound:
            return Violation(c, f"only {total - bad}/{total} instances satisfy {render(c.inner)}",
                             bad, total, tuple(sorted(g)))
        return None
    bad = sum(1 for x in instances if not instance_holds(c, x))
    if bad:
        return Violation(c, f"{bad}/{total} instances violate", bad, total, tuple(sorted(g)))
    return None


def holds_group(
    group: Iterable[str],
    rs: ConstraintSet,
    log: EventLog,
    evaluator: GroupEvaluator | None = None,
    *,
    short_circuit: bool = True,
) -> CheckResult:
    """Check class-based then instance-based constraints for one group.

    With ``short_circuit`` the check stops at the first violated constraint.
    Traces without an instance of the group satisfy instance constraints
    vacuously.
    """
    g = frozenset(group)
    if not g:
        raise ValueError("group must be non-empty")
    unknown = g - log.classes
    if unknown:
        raise UnknownClass(f"unknown classes {sorted(unknown)}")
    violations: list[Violation] = []
    checked = 0
    for c in rs.class_based:
        checked += 1
        if not _class_check(c, g, log):
            violations.append(Violation(c, "class constraint violated", classes=tuple(sorted(g))))
            if short_circuit:
                return CheckResult(False, tuple(violations), checked)
    if rs.instance_based:
        if evaluator is None or evaluator.log is not log or evaluator.max_per_class != rs.max_per_class:
            evaluator = GroupEvaluator(log, rs.max_per_class)
        instances = evaluator.instances(g)
        for c in rs.instance_based:
            checked += 1
            v = _instance_check(c, g, log, instances)
            if v is not None:
                violations.append(v)
                if short_circuit:
                    return CheckResult(False, tuple(violations), checked)
    return CheckResult(not violations, tuple(violations), checked)


def holds_grouping(
    grouping: Iterable[Iterable[str]],
    rs: ConstraintSet,
    log: EventLog,
    evaluator: GroupEvaluator | None = None,
) -> CheckResult:
    groups = [frozenset(g) for g in grouping]
    check_partition(groups, log.classes)
    violations: list[Violation] = []
    n = len(groups)
    for c in rs.grouping:
        ok = n <= c.bound if c.kind is K.GROUP_COUNT_MAX else n >= c.bound
        if not ok:
            violations.append(Violation(c, f"grouping has {n} groups"))
    for g in sorted(groups, key=sorted):
        res = holds_group(g, rs, log, evaluator, short_circuit=False)
        violations.extend(res.violations)
    return CheckResult(not violations, tuple(violations), len(rs) * max(n, 1))


def check_partition(groups: list[frozenset[str]], classes: frozenset[str]) -> None:
    seen: set[str] = set()
    for g in groups:
        if not g:
            raise NotAPartition("empty group")
        if seen & g:
            raise NotAPartition(f"classes {sorted(seen & g)} appear in more than one group")
        seen |= g
    if seen != set(classes):
        missing = sorted(set(classes) - seen)
        extra = sorted(seen - set(classes))
        raise NotAPartition(f"not an exact cover (missing {missing}, unknown {extra})")
