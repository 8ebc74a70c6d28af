from __future__ import annotations

import random
from pathlib import Path

import pytest

from logabstract.constraints import parse_constraints
from logabstract.events import EventLog

DATA = Path(__file__).parent / "data"

RUNNING_TRACES = {
    "1": "rcp ckc acc prio inf arv".split(),
    "2": "rcp ckt rej prio arv inf".split(),
    "3": "rcp ckc acc inf arv".split(),
    "4": "rcp ckc rej rcp ckt acc prio arv inf".split(),
}
ROLES = {c: "clerk" for c in ("rcp", "ckc", "ckt", "prio", "inf", "arv")} | {"acc": "manager", "rej": "manager"}
ROLE_GROUPING = {
    frozenset({"rcp", "ckc", "ckt"}),
    frozenset({"acc"}),
    frozenset({"rej"}),
    frozenset({"prio", "inf", "arv"}),
}


def running_log() -> EventLog:
    return EventLog.from_sequences(RUNNING_TRACES, attrs={c: {"role": r} for c, r in ROLES.items()})


@pytest.fixture
def log() -> EventLog:
    return running_log()


@pytest.fixture
def role_rs():
    return parse_constraints("instance distinct(role) <= 1")


# ---------------------------------------------------------------------------
# random corpora shared by property and acceptance tests
# ---------------------------------------------------------------------------

CONSTRAINT_POOL = [
    "instance distinct(role) <= 1",
    "instance distinct(role) <= 2",
    "instance distinct(role) >= 2",
    "instance sum(cost) <= 12",
    "instance sum(cost) >= 6",
    "instance avg(cost) <= 4",
    "instance avg(cost) >= 2",
    "instance duration <= 300",
    "instance maxgap <= 120",
    "instance perclass <= 2",
    "atleast 0.75: instance duration <= 240",
    "atleast 0.5: sum(cost) <= 8",
    "class count <= 3",
    "class count >= 2",
    "class distinct(role) <= 1",
    "grouping count <= 4",
    "grouping count >= 2",
]


def random_log(rng: random.Random, max_classes: int = 8, max_traces: int = 6, max_len: int = 9) -> EventLog:
    n_classes = rng.randint(1, max_classes)
    classes = [chr(ord("a") + i) for i in range(n_classes)]
    roles = {c: rng.choice(["r1", "r2", "r3"]) for c in classes}
    records = []
    for t in range(rng.randint(1, max_traces)):
        ts = 0
        for _ in range(rng.randint(1, max_len)):
            c = rng.choice(classes)
            ts += rng.choice([0, 30, 60, 90, 180])
            attrs = {"role": roles[c]}
            if rng.random() < 0.85:
                attrs["cost"] = rng.randint(0, 6)
            records.append((f"t{t}", c, ts * 1000, attrs))
    return EventLog.from_records(records)


def random_constraints(rng: random.Random, max_size: int = 3):
    lines = rng.sample(CONSTRAINT_POOL, rng.randint(0, max_size))
    return parse_constraints("\n".join(lines))


def fuzz_corpus(seed: int, n: int, **kw):
    rng = random.Random(seed)
    return [(random_log(rng, **kw), random_constraints(rng)) for _ in range(n)]


# ---------------------------------------------------------------------------
# acceptance reporting
# ---------------------------------------------------------------------------

# keyed by (criterion number, variant); filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[tuple[int, str], str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
