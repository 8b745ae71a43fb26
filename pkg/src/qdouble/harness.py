"""Check records, timing and canonical JSON for experiment reports.

Every check produces a record with at least ``name``, ``passed``,
``max_deviation``, ``support_used`` and ``wall_time``.  Anything else a
check wants to report goes under ``details``.  Reports are serialised with
sorted keys and fixed float formatting, so two runs with the same seed give
identical bytes apart from the ``wall_time`` fields.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np

CORE_FIELDS = ("name", "passed", "max_deviation", "support_used", "wall_time")


def jsonable(x):
    """Plain JSON types from numpy scalars, arrays, complex numbers and tuples."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_float(x.real), _float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return _float(x)
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _float(v):
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return str(v)
    # 12 significant digits hides last-ulp noise in values that are
    # mathematically exact but computed through different BLAS paths
    return float(f"{v:.12g}")


def make_record(raw: dict, tolerance=None, bound="upper", wall_time=None):
    """Normalise a check result into the report shape.

    ``bound="upper"`` means the check passes when the deviation is below the
    tolerance (and any extra condition the check reported also holds);
    ``"lower"`` is for counterexample checks that must deviate by at least
    the tolerance.  With ``tolerance=None`` the check's own verdict stands.
    """
    raw = dict(raw)
    name = str(raw.pop("name"))
    own = bool(raw.pop("passed"))
    dev = float(raw.pop("max_deviation", 0.0))
    support = int(raw.pop("support_used", 0) or 0)
    wt = raw.pop("wall_time", None)
    if wall_time is not None:
        wt = wall_time
    extra_ok = bool(raw.pop("conditions_ok", True))
    if tolerance is None:
        passed = own
    elif bound == "upper":
        passed = dev < tolerance and extra_ok
    else:
        passed = dev > tolerance and extra_ok
    rec = {"name": name, "passed": bool(passed), "max_deviation": dev,
           "support_used": support, "wall_time": round(float(wt or 0.0), 3)}
    if tolerance is not None:
        rec["tolerance"] = float(tolerance)
    if raw:
        rec["details"] = jsonable(raw)
    return rec


def timed(fn, *args, **kwargs):
    """Call ``fn`` and return (result, seconds)."""
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


class Recorder:
    """Collects records for one report, applying a tolerance override."""

    def __init__(self, tolerance_override=None):
        self.override = tolerance_override
        self.records = []
        self.summary = {}

    def add(self, raw, tolerance=None, bound="upper", wall_time=None):
        tol = tolerance
        if self.override is not None and bound == "upper" and tolerance is not None:
            tol = self.override
        rec = make_record(raw, tol, bound, wall_time)
        self.records.append(rec)
        return rec

    def run(self, fn, *args, tolerance=None, bound="upper", **kwargs):
        """Time ``fn`` and add the record (or list of records) it returns."""
        out, secs = timed(fn, *args, **kwargs)
        if isinstance(out, dict):
            return [self.add(out, tolerance, bound, secs)]
        share = secs / max(1, len(out))
        return [self.add(r, tolerance, bound, r.get("wall_time", share)) for r in out]

    @property
    def passed(self):
        return all(r["passed"] for r in self.records)


def build_report(subcommand, config: dict, recorder: Recorder) -> dict:
    return {"subcommand": subcommand, "config": jsonable(config), "passed": recorder.passed,
            "checks": recorder.records, "summary": jsonable(recorder.summary)}


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def strip_timing(report):
    """Copy of a report with every ``wall_time`` removed (for comparisons)."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k != "wall_time"}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report
