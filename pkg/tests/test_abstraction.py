import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ROLE_GROUPING, random_log, running_log
from logabstract.abstraction import AbstractionStrategy, abstract_log, default_names, trace_instances
from logabstract.errors import NotAPartition
from logabstract.events import EventLog

F = frozenset
CLRK1 = F({"rcp", "ckc", "ckt"})
CLRK2 = F({"prio", "inf", "arv"})
NAMES = {CLRK1: "clrk1", CLRK2: "clrk2", F({"acc"}): "acc", F({"rej"}): "rej",
         F({"rcp", "ckc"}): "clrk1"}
TRACE5 = ["rcp", "ckc", "prio", "acc", "inf", "arv"]


def test_first_trace_completion_only():
    out = abstract_log(running_log(), ROLE_GROUPING, AbstractionStrategy.COMPLETION_ONLY, NAMES)
    assert out.by_id["1"].labels == ("clrk1", "acc", "clrk2")
    assert out.by_id["4"].labels == ("clrk1", "rej", "clrk1", "acc", "clrk2")


def test_fifth_trace_both_strategies():
    log = EventLog.from_sequences({"5": TRACE5})
    out = abstract_log(log, _cover(log), "complete", NAMES)
    assert out.traces[0].labels == ("clrk1", "acc", "clrk2")
    out = abstract_log(log, _cover(log), "start-complete", NAMES)
    assert out.traces[0].labels == ("clrk1_s", "clrk1_c", "clrk2_s", "acc", "clrk2_c")


def _cover(log):
    # the fixture trace lacks ckt and rej, so restrict the four groups to its classes
    return [g & log.classes for g in ROLE_GROUPING if g & log.classes]


def test_retained_events_keep_timestamps_and_aggregates():
    log = running_log()
    out = abstract_log(log, ROLE_GROUPING, "start_and_complete", NAMES)
    src = log.by_id["1"]
    t = out.by_id["1"]
    assert [e.timestamp for e in t] == [src[0].timestamp, src[1].timestamp, src[2].timestamp, src[3].timestamp,
                                        src[5].timestamp]
    assert t[1].attrs == {"duration": src[1].timestamp - src[0].timestamp, "n_events": 2}
    assert t[2].attrs == {"duration": 0, "n_events": 1}
    assert set(t[0].attrs) == {"duration", "n_events"}  # role dropped


def test_identity_grouping_relabels_only():
    log = running_log()
    out = abstract_log(log, [{c} for c in log.classes])
    for a, b in zip(log, out):
        assert a.labels == b.labels
        assert [e.timestamp for e in a] == [e.timestamp for e in b]


def test_not_a_partition():
    log = running_log()
    with pytest.raises(NotAPartition):
        abstract_log(log, [CLRK1])
    with pytest.raises(NotAPartition):
        abstract_log(log, list(ROLE_GROUPING) + [F({"rcp"})])


def test_names_must_be_complete_and_distinct():
    log = running_log()
    with pytest.raises(ValueError):
        abstract_log(log, ROLE_GROUPING, names={CLRK1: "x"})
    with pytest.raises(ValueError):
        abstract_log(log, ROLE_GROUPING, names={g: "same" for g in ROLE_GROUPING})


def test_strategy_parse():
    assert AbstractionStrategy.parse("complete") is AbstractionStrategy.COMPLETION_ONLY
    assert AbstractionStrategy.parse("start-complete") is AbstractionStrategy.START_AND_COMPLETE
    assert AbstractionStrategy.parse("start_and_complete") is AbstractionStrategy.START_AND_COMPLETE
    with pytest.raises(ValueError):
        AbstractionStrategy.parse("middle")


def test_default_names():
    log = running_log()
    names = default_names(ROLE_GROUPING, log, "role")
    assert names[CLRK1] == "clerk_Activity 1"
    assert names[CLRK2] == "clerk_Activity 2"
    assert names[F({"acc"})] == "acc"
    plain = default_names(ROLE_GROUPING, log)
    assert (plain[CLRK1], plain[CLRK2]) == ("G1", "G2")
    mixed = default_names([F({"rcp", "acc"}), F({"rej", "ckc"})], log, "role")
    assert set(mixed.values()) == {"G1", "G2"}


def test_default_names_by_origin_prefix():
    seqs = [["a1", "a2", "o1", "o2", "w1", "w2"]]
    origin = {c: {"origin": c[0].upper()} for c in seqs[0]}
    log = EventLog.from_sequences(seqs, attrs=origin)
    names = default_names([F({"a1", "a2"}), F({"o1", "o2"}), F({"w1", "w2"})], log, "origin")
    assert sorted(names.values()) == ["A_Activity 1", "O_Activity 1", "W_Activity 1"]


def test_default_names_avoid_class_names():
    log = EventLog.from_sequences([["G1", "x", "y"]])
    names = default_names([F({"G1"}), F({"x", "y"})], log)
    assert names[F({"x", "y"})] == "G2"


def _check_lengths(log, groups, k=1):
    comp = abstract_log(log, groups, "complete", max_per_class=k)
    both = abstract_log(log, groups, "start-complete", max_per_class=k)
    for t, c, b in zip(log, comp, both):
        xs = [x for _, x in trace_instances(t, groups, k)]
        assert len(c) == len(xs)
        assert len(b) == sum(2 if len(x) > 1 else 1 for x in xs)
        for out in (c, b):
            stamps = [e.timestamp for e in out]
            assert stamps == sorted(stamps)


def _random_partition(rng, classes):
    classes = sorted(classes)
    rng.shuffle(classes)
    groups, i = [], 0
    while i < len(classes):
        j = rng.randint(i + 1, len(classes))
        groups.append(F(classes[i:j]))
        i = j
    return groups


def test_length_invariants_on_random_logs():
    rng = random.Random(4)
    for _ in range(60):
        log = random_log(rng)
        _check_lengths(log, _random_partition(rng, log.classes), rng.choice([1, 2]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcde"), min_size=1, max_size=10), min_size=1, max_size=4), st.randoms())
def test_order_preserved(seqs, rnd):
    log = EventLog.from_sequences(seqs)
    groups = _random_partition(rnd, log.classes)
    out = abstract_log(log, groups, "start-complete")
    names = default_names(groups, log)
    by_name = {v: g for g, v in names.items()}
    for src, t in zip(log, out):
        # every retained event is a relabelled source event, in source order
        pos = 0
        for e in t:
            base = e.event_class
            if base not in by_name:
                base = base.rsplit("_", 1)[0]
            g = by_name[base]
            while not (src[pos].event_class in g and src[pos].timestamp == e.timestamp):
                pos += 1
            pos += 1
