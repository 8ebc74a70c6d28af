import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, running_log
from logabstract.abstraction import abstract_log
from logabstract.errors import EmptyLog, ParseError, UnknownClass
from logabstract.events import EventLog, Timestamp, class_attribute, load_log, write_log


def test_running_example_csv():
    log = load_log(DATA / "running_example.csv")
    assert len(log) == 4
    assert len(log.classes) == 8
    assert log.by_id["4"].labels == ("rcp", "ckc", "rej", "rcp", "ckt", "acc", "prio", "arv", "inf")


def test_single_row(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("case,class,time\nc1,a,5\n")
    log = load_log(p)
    assert len(log) == 1 and len(log.traces[0]) == 1
    assert log.traces[0][0].timestamp == 5


def test_out_of_order_rows_are_sorted(tmp_path):
    p = tmp_path / "o.csv"
    p.write_text("case,class,time\nc,b,2024-01-01T10:00:00Z\nc,a,2024-01-01T09:00:00Z\nc,c,2024-01-01T10:00:00Z\n")
    log = load_log(p)
    assert log.traces[0].labels == ("a", "b", "c")  # equal stamps keep input order
    assert [e.ordinal for e in log.traces[0]] == [0, 1, 2]


def test_custom_columns(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("id,activity,ts,who\n1,a,0,bob\n1,b,10,amy\n")
    log = load_log(p, column_map={"case": "id", "class": "activity", "timestamp": "ts"})
    assert log.traces[0].labels == ("a", "b")
    assert log.traces[0][1].attrs == {"who": "amy"}


@pytest.mark.parametrize("body, row", [
    ("case,class\n1,a\n", 1),
    ("case,class,time\n1,a,yesterday\n", 2),
    ("case,class,time\n1,a,0\n1,,5\n", 3),
    ("case,class,time\n1,a,0,extra\n", 2),
])
def test_parse_errors_carry_row(tmp_path, body, row):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(ParseError) as exc:
        load_log(p)
    assert exc.value.row == row


def test_empty_log(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("case,class,time\n")
    with pytest.raises(EmptyLog):
        load_log(p)


def test_jsonl_types(tmp_path):
    p = tmp_path / "l.jsonl"
    rows = [
        {"case": 1, "class": "a", "time": "2024-01-01T00:00:00Z", "cost": 2.5, "tag": "7", "at": "2024-02-01T00:00:00Z"},
        {"case": 1, "class": "b", "time": 60000, "flag": None},
    ]
    p.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    log = load_log(p)
    e = log.traces[0][1]  # 60000 ms sorts before 2024
    assert e.event_class == "a"
    assert e.attrs["tag"] == "7"
    assert isinstance(e.attrs["at"], Timestamp)
    assert log.traces[0][0].attrs == {}


def test_jsonl_rejects_booleans(tmp_path):
    p = tmp_path / "b.jsonl"
    p.write_text('{"case": 1, "class": "a", "time": 0, "ok": true}\n')
    with pytest.raises(ParseError):
        load_log(p)


@pytest.mark.parametrize("suffix", [".csv", ".jsonl"])
def test_round_trip(tmp_path, suffix):
    log = running_log()
    p = tmp_path / f"log{suffix}"
    write_log(log, p)
    assert load_log(p) == log


def test_unicode_round_trip(tmp_path):
    log = EventLog.from_sequences({"ç1": ["größe", "naïve"]}, attrs={"größe": {"note": "日本語, \"quoted\""}})
    for suffix in (".csv", ".jsonl"):
        p = tmp_path / f"u{suffix}"
        write_log(log, p)
        assert load_log(p) == log


def test_abstracted_log_reloads(tmp_path):
    log = running_log()
    groups = [{"rcp", "ckc", "ckt"}, {"acc"}, {"rej"}, {"prio", "inf", "arv"}]
    out = abstract_log(log, groups)
    p = tmp_path / "abs.csv"
    write_log(out, p)
    assert load_log(p) == out


def test_write_is_idempotent_after_one_pass(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("case,class,time,v\n1,a,2024-01-01T00:00:00+01:00,1.50\n1,b,3,x\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_log(load_log(src), a)
    write_log(load_log(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_class_attribute():
    log = running_log()
    assert class_attribute(log, "rcp", "role") == {"clerk"}
    assert class_attribute(log, "acc", "role") == {"manager"}
    assert class_attribute(log, "rcp", "cost") == frozenset()
    with pytest.raises(UnknownClass):
        class_attribute(log, "nope", "role")


def test_log_invariants():
    log = running_log()
    assert sum(len(t) for t in log) == log.n_events == 26
    assert all(e.event_class in log.classes for t in log for e in t)
    assert log.class_order() == ["rcp", "ckc", "acc", "prio", "inf", "arv", "ckt", "rej"]


def test_negative_timestamp_rejected():
    with pytest.raises(ValueError):
        Timestamp(-1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("xyz"), st.integers(0, 10**6)), min_size=1, max_size=20))
def test_from_records_sorted_and_deterministic(records):
    recs = [(c, k, ts, {}) for c, k, ts in records]
    log = EventLog.from_records(recs)
    assert log == EventLog.from_records(recs)
    for t in log:
        stamps = [e.timestamp for e in t]
        assert stamps == sorted(stamps)
    assert log.n_events == len(records)
