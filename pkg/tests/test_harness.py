import json

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from qdouble.harness import Recorder, dumps, jsonable, make_record, strip_timing


def test_record_has_core_fields():
    rec = make_record({"name": "x", "passed": True, "max_deviation": 1e-13, "extra": 3}, 1e-12)
    assert set(rec) >= {"name", "passed", "max_deviation", "support_used", "wall_time"}
    assert rec["details"] == {"extra": 3}


def test_upper_and_lower_bounds():
    raw = {"name": "x", "passed": True, "max_deviation": 0.5}
    assert not make_record(raw, 0.1)["passed"]
    assert make_record(raw, 0.1, bound="lower")["passed"]
    assert not make_record({**raw, "conditions_ok": False}, 1.0)["passed"]


def test_override_only_loosens_upper_checks():
    rec = Recorder(tolerance_override=1.0)
    rec.add({"name": "a", "passed": False, "max_deviation": 0.5}, tolerance=1e-12)
    rec.add({"name": "b", "passed": True, "max_deviation": 0.5}, tolerance=0.1, bound="lower")
    assert [r["passed"] for r in rec.records] == [True, True]
    assert rec.records[1]["tolerance"] == 0.1


def test_jsonable_handles_numpy():
    out = jsonable({"a": np.float64(0.1), "b": np.arange(2), "c": 1 + 2j, (1, 2): np.bool_(True)})
    assert json.loads(json.dumps(out)) == {"a": 0.1, "b": [0, 1], "c": [1.0, 2.0], "(1, 2)": True}


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_rounding_is_idempotent(x):
    once = jsonable(x)
    assert jsonable(once) == once


def test_strip_timing_and_dumps_sorted():
    rep = {"b": 1, "checks": [{"wall_time": 3.0, "name": "z"}], "a": 2}
    assert strip_timing(rep) == {"b": 1, "checks": [{"name": "z"}], "a": 2}
    text = dumps(rep)
    assert text.index('"a"') < text.index('"b"') and text.endswith("\n")
