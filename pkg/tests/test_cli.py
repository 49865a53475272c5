import json
import subprocess
import sys

import pytest

from ris_sop import cli, validation
from ris_sop.validation import CriterionResult


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({
        "name": "cli",
        "system": {"n_t": 3, "n_r": 2, "n_e": 2, "n_s": 4, "snr_db": 8, "r_s": 1.0},
        "sweep": {"axis": "r_s", "values": [0.5, 1.0]},
        "schemes": ["mrt_no_ris", "ao_man"],
    }))
    return p


def test_sop_theory(capsys, scenario):
    code, out, _ = run(capsys, "sop-theory", "--config", str(scenario), "--seed", "4")
    res = json.loads(out)
    assert code == 0
    assert res["sop_high_snr_bound"] <= res["sop_theory"] <= 1


def test_sop_mc(capsys, scenario):
    code, out, _ = run(capsys, "sop-mc", "--config", str(scenario), "--trials", "20000", "--scheme", "mrt_ps")
    res = json.loads(out)
    assert code == 0 and res["trials"] == 20000
    assert abs(res["sop_mc"] - res["sop_theory"]) <= 5 * res["sop_mc_stderr"] + 0.01


def test_optimize_prints_trace(capsys, scenario):
    code, out, _ = run(capsys, "optimize", "--config", str(scenario), "--solver", "sdr", "--iter-max", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "iteration,p_out,z" and lines[1].startswith("0,")
    assert lines[-1].startswith("# converged=")


def test_sweep_to_file_is_reproducible(capsys, scenario, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "sweep", "--config", str(scenario), "--out", str(a), "--seed", "7")[0] == 0
    assert run(capsys, "sweep", "--config", str(scenario), "--out", str(b), "--seed", "7")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, "sweep", "--config", str(scenario), "--seed", "7")
    assert out == a.read_text()
    assert len(out.splitlines()) == 1 + 2 * 2


def test_config_failures_exit_1(capsys, tmp_path):
    assert run(capsys, "sweep")[0] == 1
    assert run(capsys, "sweep", "--config", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "system": {"n_t": 1}, "sweep": {}, "schemes": []}))
    code, _, err = run(capsys, "sop-theory", "--config", str(bad))
    assert code == 1 and "error" in err
    assert run(capsys, "sop-theory", "--seed", str(2**64))[0] == 1


def test_numerical_error_exits_2(capsys, monkeypatch):
    def boom(*a, **k):
        raise FloatingPointError("non-finite gradient")

    monkeypatch.setattr(cli, "alternating_optimize", boom)
    code, _, err = run(capsys, "optimize")
    assert code == 2 and "numerical" in err


def test_validate_runs_selected_criterion(capsys):
    code, out, _ = run(capsys, "validate", "--only", "9")
    assert code == 0
    assert out.splitlines()[0].startswith("[PASS] 9")


def test_validate_injected_failure_is_nonzero(capsys):
    code, out, _ = run(capsys, "validate", "--only", "9", "--inject-failure")
    assert code == 1 and "[FAIL]" in out


def test_validate_report_has_one_row_per_criterion(capsys, monkeypatch):
    def fake(i, ok):
        def criterion(seed=0):
            return CriterionResult(f"{i} fake", 0.0, 1.0, ok)
        criterion.__name__ = f"fake{i}"
        return criterion

    monkeypatch.setattr(validation, "CRITERIA", tuple(fake(i, i != 2) for i in range(1, 6)))
    code, out, _ = run(capsys, "validate")
    rows = [l for l in out.splitlines() if l.startswith("[")]
    assert len(rows) == 5 and code == 1
    assert out.splitlines()[-1] == "4/5 criteria passed"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ris_sop", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sop-theory" in proc.stdout
