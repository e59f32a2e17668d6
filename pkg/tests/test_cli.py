import csv
import json
import time

import numpy as np
import pytest

from holojcas import geometry
from holojcas.cli import SWEEP_COLUMNS, TRACE_COLUMNS, load_run_config, main
from holojcas.config import ConfigError

SPEC_HEADER = (
    "axis_value,scheme,mean_rate,mean_crb_theta_lin,mean_crb_phi_lin,mean_crb_theta_db,"
    "mean_crb_phi_db,mean_crb_theta_db_alt,mean_crb_phi_db_alt,n_ok,n_failed"
)


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_convergence_smoke(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"M": 36, "K": 3, "snr_db": 10})
    out = tmp_path / "trace.csv"
    assert main(["convergence", "--config", cfg, "--out", str(out), "--seed", "0"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == list(TRACE_COLUMNS)
    assert 1 <= len(rows) <= 100
    rates = [float(r["rate"]) for r in rows]
    assert len(set(rates)) > 1
    for r in rows:
        assert abs(float(r["tx_power"]) - 1.0) < 1e-9


def test_convergence_json(tmp_path):
    out = tmp_path / "trace.json"
    assert main(["convergence", "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    assert doc["termination"] in ("tolerance-met", "iteration-cap")
    assert set(doc["rows"][0]) == set(TRACE_COLUMNS)


@pytest.mark.parametrize(
    "content,needle",
    [
        ('{"M": 36,', "malformed"),
        ('{"M": 35}', "perfect square"),
        ('{"M": 36, "colour": 1}', "unknown config keys"),
        ('{"M": 36.5}', "integer"),
        ('{"sweep": {"axis": "power", "values": [1]}}', "axis"),
    ],
)
def test_bad_config_exits_nonzero_without_output(tmp_path, capsys, content, needle):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    out = tmp_path / "out.csv"
    assert main(["convergence", "--config", str(cfg), "--out", str(out)]) != 0
    assert not out.exists()
    assert needle in capsys.readouterr().err
    assert [p.name for p in tmp_path.iterdir()] == ["bad.json"]


def test_load_config_degrees_and_gamma(tmp_path):
    cfg, run = load_run_config(
        write_json(tmp_path / "c.json", {"theta_t_deg": 30, "gamma": [0.5, -0.5], "n_trials": 7})
    )
    assert cfg.theta_t == pytest.approx(np.pi / 6)
    assert cfg.gamma == 0.5 - 0.5j
    assert run["n_trials"] == 7
    with pytest.raises(ConfigError):
        load_run_config(None, {"theta_t": 0.1, "theta_t_deg": 10})


def sweep_cfg(tmp_path):
    return write_json(
        tmp_path / "s.json",
        {"M": 16, "K": 3, "sweep": {"axis": "snr_db", "values": [0, 10]}, "n_trials": 3},
    )


def test_sweep_csv_header_and_rows(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", sweep_cfg(tmp_path), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == SPEC_HEADER == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 1 + 2 * 2
    rows = list(csv.DictReader(out.open()))
    assert {r["scheme"] for r in rows} == {"proposed", "benchmark"}
    assert all(r["n_ok"] == "3" and r["n_failed"] == "0" for r in rows)


def test_sweep_is_byte_identical_on_rerun(tmp_path):
    cfg = sweep_cfg(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", cfg, "--out", str(a), "--seed", "7"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b), "--seed", "7"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_invalid_aperture_rejected(tmp_path, capsys):
    cfg = write_json(tmp_path / "s.json", {"sweep": {"axis": "aperture", "values": [36, 35]}})
    out = tmp_path / "o.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out), "--trials", "1"]) != 0
    assert "perfect square" in capsys.readouterr().err
    assert not out.exists()


def test_validate_passes_quickly(capsys):
    t0 = time.perf_counter()
    assert main(["validate"]) == 0
    assert time.perf_counter() - t0 < 60
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and out.count("[PASS]") >= 6


def test_validate_catches_derivative_sign_flip(monkeypatch, capsys):
    original = geometry.steering_derivatives

    def flipped(theta, phi, config):
        d_t, d_p = original(theta, phi, config)
        return -d_t, d_p

    monkeypatch.setattr(geometry, "steering_derivatives", flipped)
    assert main(["validate"]) != 0
    assert "[FAIL] steering-derivatives-fd" in capsys.readouterr().out
