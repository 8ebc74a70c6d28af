import random

import numpy as np
import pytest
from sklearn.metrics import silhouette_score

from conftest import ROLE_GROUPING, random_log, running_log
from logabstract.abstraction import abstract_log
from logabstract.errors import NotAPartition, TooFewGroups
from logabstract.events import EventLog
from logabstract.metrics import class_distances, dfg_edge_reduction, quality_report, silhouette, size_reduction

F = frozenset


def reference_silhouette(groups, log):
    """Silhouette via scikit-learn on the precomputed class distance matrix.

    scikit-learn also scores singleton clusters as 0, matching our convention.
    """
    classes, d = class_distances(log)
    label = {c: k for k, g in enumerate(groups) for c in g}
    return silhouette_score(np.array(d), [label[c] for c in classes], metric="precomputed")


def test_size_reduction():
    log = running_log()
    assert size_reduction(ROLE_GROUPING, log) == 0.5
    assert size_reduction([{c} for c in log.classes], log) == 0.0
    assert size_reduction([log.classes], log) == 1 - 1 / 8
    with pytest.raises(NotAPartition):
        size_reduction([{"rcp"}], log)


def test_size_reduction_decreases_with_more_groups():
    log = EventLog.from_sequences([list("abcdef")])
    values = [size_reduction([F("abcdef"[:n])] + [F(c) for c in "abcdef"[n:]], log) for n in range(6, 0, -1)]
    assert values == sorted(values, reverse=True) and len(set(values)) == len(values)


def test_edge_reduction():
    log = running_log()
    assert dfg_edge_reduction(log, log) == 0.0
    abstracted = abstract_log(log, ROLE_GROUPING)
    assert 0 < dfg_edge_reduction(log, abstracted) < 1
    collapsed = abstract_log(EventLog.from_sequences([list("abc")] * 2), [F("abc")])
    assert dfg_edge_reduction(EventLog.from_sequences([list("abc")] * 2), collapsed) == 1.0
    single = EventLog.from_sequences([["a"]])
    assert dfg_edge_reduction(single, single) == 0.0


def test_identity_edge_reduction_is_zero():
    log = running_log()
    assert dfg_edge_reduction(log, abstract_log(log, [{c} for c in log.classes])) == 0.0


def test_class_distances():
    log = EventLog.from_sequences([list("abcd")] * 10 + [["x"]])
    classes, d = class_distances(log)
    i = {c: k for k, c in enumerate(classes)}
    assert d[i["a"]][i["b"]] == 1.0
    assert d[i["a"]][i["d"]] == 3.0
    assert d[i["a"]][i["x"]] == 4.0  # never together: longest trace
    assert all(d[k][k] == 0.0 for k in range(len(classes)))


def test_silhouette_positional_clusters():
    log = EventLog.from_sequences([list("abcdefgh")] * 10)
    good = [F("abcd"), F("efgh")]
    bad = [F("aceg"), F("bdfh")]
    s_good = silhouette(good, log)
    assert s_good > 0
    assert s_good == pytest.approx(reference_silhouette(good, log), abs=1e-12)
    assert silhouette(bad, log) < s_good
    assert silhouette(bad, log) == pytest.approx(reference_silhouette(bad, log), abs=1e-12)
    small = EventLog.from_sequences([list("abcd")] * 10)
    assert silhouette([F("ab"), F("cd")], small) > 0


def test_silhouette_singletons_and_errors():
    log = running_log()
    assert silhouette([{c} for c in log.classes], log) == 0.0
    with pytest.raises(TooFewGroups):
        silhouette([log.classes], log)


def test_silhouette_matches_reference_on_random_logs():
    rng = random.Random(13)
    compared = 0
    for _ in range(80):
        log = random_log(rng)
        classes = sorted(log.classes)
        if len(classes) < 3:
            continue
        rng.shuffle(classes)
        cut = rng.randint(1, len(classes) - 1)
        groups = [F(classes[:cut]), F(classes[cut:])]
        if rng.random() < 0.5 and len(classes) > 3:
            groups = [F(classes[:cut]), F(classes[cut:-1]), F(classes[-1:])] if cut < len(classes) - 1 else groups
        s = silhouette(groups, log)
        assert -1 <= s <= 1
        assert s == pytest.approx(reference_silhouette(groups, log), abs=1e-9)
        relabelled = list(reversed(groups))
        assert silhouette(relabelled, log) == pytest.approx(s, abs=1e-12)
        compared += 1
    assert compared > 30


def test_quality_report():
    log = running_log()
    q = quality_report(ROLE_GROUPING, log, abstract_log(log, ROLE_GROUPING))
    assert (q.group_count, q.class_count, q.size_reduction) == (4, 8, 0.5)
    assert q.silhouette == pytest.approx(reference_silhouette(ROLE_GROUPING, log))
    assert set(q.to_dict()) == {"size_reduction", "dfg_edge_reduction", "silhouette", "group_count", "class_count"}
    one = quality_report([log.classes], log, abstract_log(log, [log.classes]))
    assert one.silhouette is None
