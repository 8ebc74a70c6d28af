import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import running_log
from logabstract.errors import NoInstances, UnknownClass
from logabstract.events import EventLog
from logabstract.groups import (
    GroupEvaluator,
    group_distance,
    grouping_distance,
    inst,
    interrupts,
    log_instances,
    missing,
    occurs,
)

CLRK1 = {"rcp", "ckc", "ckt"}
CLRK2 = {"prio", "inf", "arv"}


def oracle_distance(sequences, group, per_class=1):
    """Direct transcription of the distance: positions instead of event objects."""
    terms = []
    for seq in sequences:
        positions = [i for i, c in enumerate(seq) if c in group]
        chunks, cur = [], []
        for i in positions:
            if sum(1 for j in cur if seq[j] == seq[i]) >= per_class:
                chunks.append(cur)
                cur = []
            cur.append(i)
        if cur:
            chunks.append(cur)
        for ch in chunks:
            span = ch[-1] - ch[0] + 1
            inter = span - len(ch)
            miss = len(group) - len({seq[i] for i in ch})
            terms.append(inter / len(ch) + miss / len(group) + 1 / len(group))
    return sum(terms) / len(terms)


def test_inst_examples():
    log = running_log()
    s1, s2, s4 = log.by_id["1"], log.by_id["2"], log.by_id["4"]
    assert [x.labels for x in inst(s1, CLRK1)] == [("rcp", "ckc")]
    assert [x.labels for x in inst(s4, CLRK1)] == [("rcp", "ckc"), ("rcp", "ckt")]
    assert [x.labels for x in inst(s1, {"acc"})] == [("acc",)]
    assert inst(s2, {"acc"}) == []


def test_inst_per_class_bound():
    t = EventLog.from_sequences([list("ababa")]).traces[0]
    assert [x.labels for x in inst(t, {"a", "b"}, 2)] == [("a", "b", "a", "b"), ("a",)]
    with pytest.raises(ValueError):
        inst(t, {"a"}, 0)


def test_interrupts_and_missing():
    t = EventLog.from_sequences([list("abcde")]).traces[0]
    (x,) = inst(t, {"a", "e"})
    assert interrupts(x, t) == 3
    (y,) = inst(t, {"b", "c"})
    assert interrupts(y) == 0
    s1 = running_log().by_id["1"]
    (z,) = inst(s1, CLRK1)
    assert interrupts(z, s1) == 0
    assert missing(z, CLRK1) == 1
    assert missing(y, {"b", "c"}) == 0
    (w,) = inst(t, {"c"})
    assert missing(w, {"c"}) == 0


def test_singletons_have_distance_one():
    log = running_log()
    for c in log.classes:
        assert group_distance({c}, log) == 1.0
    assert grouping_distance([{c} for c in log.classes], log) == 8.0


def test_running_example_distances():
    log = running_log()
    seqs = [t.labels for t in log]
    # clrk1: instances <rcp,ckc> x3 and <rcp,ckt> x2, all contiguous, one class missing each
    assert group_distance(CLRK1, log) == pytest.approx(2 / 3)
    assert group_distance(CLRK1, log) == pytest.approx(oracle_distance(seqs, CLRK1))
    d2 = group_distance(CLRK2, log)
    assert d2 == pytest.approx(oracle_distance(seqs, CLRK2)) and d2 < 3
    assert group_distance({"inf", "arv"}, log) < group_distance({"inf"}, log) + group_distance({"arv"}, log)
    four = [CLRK1, {"acc"}, {"rej"}, CLRK2]
    assert grouping_distance(four, log) < 8.0


def test_distance_errors():
    log = running_log()
    with pytest.raises(ValueError):
        group_distance(set(), log)
    with pytest.raises(UnknownClass):
        group_distance({"nope"}, log)
    with pytest.raises(ValueError):
        grouping_distance([], log)
    log2 = EventLog.from_sequences({"x": ["a"]})
    with pytest.raises(NoInstances):
        GroupEvaluator(log2).distance(frozenset({"b"}))


def test_occurs():
    log = running_log()
    assert occurs({"acc", "rej"}, log)
    assert occurs({"ckc", "ckt"}, log)
    assert not occurs({"acc", "rej", "inf", "ckc", "ckt", "zzz"}, log)


def test_distance_fuzz_against_oracle():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 6)
        alphabet = "abcdef"[:n]
        seqs = [[rng.choice(alphabet) for _ in range(rng.randint(1, 10))] for _ in range(rng.randint(1, 4))]
        log = EventLog.from_sequences(seqs)
        classes = sorted(log.classes)
        group = set(rng.sample(classes, rng.randint(1, len(classes))))
        k = rng.choice([1, 1, 2])
        assert abs(group_distance(group, log, k) - oracle_distance(seqs, group, k)) <= 1e-9


def test_evaluator_matches_function():
    log = running_log()
    ev = GroupEvaluator(log)
    for g in (CLRK1, CLRK2, {"acc", "rej"}):
        assert ev.distance(frozenset(g)) == group_distance(g, log)
        assert ev.instances(frozenset(g)) == log_instances(log, g)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from("abcd"), min_size=1, max_size=15), st.sets(st.sampled_from("abcd"), min_size=1),
       st.integers(1, 3))
def test_inst_partitions_projection(seq, group, k):
    t = EventLog.from_sequences([seq]).traces[0]
    xs = inst(t, group, k)
    flat = [e for x in xs for e in x.events]
    assert [e.event_class for e in flat] == [c for c in seq if c in group]
    ordinals = [e.ordinal for e in flat]
    assert ordinals == sorted(ordinals) and len(set(ordinals)) == len(ordinals)
    for x in xs:
        assert all(x.labels.count(c) <= k for c in group)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=8), min_size=1, max_size=4),
       st.sets(st.sampled_from("abcd"), min_size=1))
def test_distance_lower_bound(seqs, group):
    log = EventLog.from_sequences(seqs)
    group = group & log.classes
    if not group:
        return
    assert group_distance(group, log) >= 1 / len(group) - 1e-12
