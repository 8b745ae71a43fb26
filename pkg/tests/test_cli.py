import json
import subprocess
import sys

import pytest

from qdouble.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from qdouble.harness import strip_timing


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_braid_passes_and_reports_phase(tmp_path):
    code, text = run(["braid", "--n", "3", "--i", "1", "--j", "2"], tmp_path)
    assert code == EXIT_OK
    rec = json.loads(text)["checks"][0]
    assert rec["details"]["phase_re"] == pytest.approx(-0.5)
    assert rec["details"]["phase_im"] == pytest.approx(-3 ** 0.5 / 2)


def test_report_is_byte_stable_apart_from_timing(tmp_path):
    argv = ["logical-qubit", "--seed", "5", "--n-states", "3"]
    _, a = run(argv, tmp_path, "a.json")
    _, b = run(argv, tmp_path, "b.json")
    ja, jb = json.loads(a), json.loads(b)
    assert strip_timing(ja) == strip_timing(jb)
    # identical bytes once the timing fields are zeroed
    for j in (ja, jb):
        for c in j["checks"]:
            c["wall_time"] = 0
    assert json.dumps(ja, sort_keys=True) == json.dumps(jb, sort_keys=True)


def test_check_failure_exit_code(tmp_path):
    # rounding leaves deviations near 1e-16, so an absurd tolerance must fail
    code, text = run(["projectors", "--tolerance", "1e-300"], tmp_path)
    assert code == EXIT_FAIL
    assert not json.loads(text)["passed"]


def test_budget_exit_code(tmp_path):
    code, text = run(["vacuum", "--group", "z2", "--support-cap", "2"], tmp_path)
    assert code == EXIT_BUDGET and text is None


def test_config_errors(tmp_path, monkeypatch):
    assert run(["braid", "--n", "1"], tmp_path)[0] == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["braid", "--config", str(bad)], tmp_path)[0] == EXIT_CONFIG
    bad.write_text("[1, 2]")
    assert run(["braid", "--config", str(bad)], tmp_path)[0] == EXIT_CONFIG
    monkeypatch.setenv("QDL_THREADS", "zero")
    assert run(["braid"], tmp_path)[0] == EXIT_CONFIG


def test_config_file_and_flags_merge(tmp_path, monkeypatch):
    monkeypatch.setenv("QDL_THREADS", "1")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "params": {"n": 2, "i": 1, "j": 1}}))
    code, text = run(["braid", "--config", str(cfg), "--seed", "9"], tmp_path)
    rep = json.loads(text)
    assert code == EXIT_OK
    assert rep["config"]["seed"] == 9 and rep["config"]["params"]["n"] == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qdouble", "braid", "--n", "2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["subcommand"] == "braid"
    assert "PASS" in proc.stderr
