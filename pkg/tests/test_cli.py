"""Exit codes, flag plumbing and file outputs of the command line tool."""

import json
import math
from pathlib import Path

import pytest

import ptcycle.cli as cli
import ptcycle.sweep
from ptcycle import SweepOutcome, fig_preset
from ptcycle.errors import IntegrationError
from ptcycle.floquet import _floquet_core

EX1_SWEEP = {
    "model": {"builtin": {"example": 1, "params": {"r0": 1.0}}},
    "axis": "lambda",
    "grid": {"start": 0.2, "stop": 0.6, "count": 2},
    "omega": 0.5,
}


def write_json(path, payload):
    path.write_text(json.dumps(payload, indent=1) + "\n")
    return str(path)


@pytest.fixture(autouse=True)
def clean_thread_env(monkeypatch):
    monkeypatch.delenv("PTCYCLE_THREADS", raising=False)


@pytest.fixture
def stub_sweep(monkeypatch):
    """Replace run_sweep inside the CLI and record what it was handed."""
    calls = []

    def fake(config, out):
        calls.append((config, Path(out)))
        return SweepOutcome(csv_path=str(out), manifest_path=str(out) + ".m",
                            rows=config.count, failures=0,
                            manifest={"config_hash": "0" * 64, "events": []})

    monkeypatch.setattr(cli, "run_sweep", fake)
    return calls


def test_no_arguments_is_a_usage_error(capsys):
    assert cli.main([]) == 2
    assert cli.main(["--help"]) == 0
    assert cli.main(["sweep", "--bogus"]) == 2
    capsys.readouterr()


def test_validate_reports_critical_lambda(tmp_path, capsys):
    cfg = write_json(tmp_path / "fig1.json", {
        "model": {"builtin": {"example": 1, "params": {"r0": 1.0}}},
        "axis": "lambda",
        "grid": {"start": 0.0, "stop": 2.0, "count": 101},
        "omega": 0.02,
    })
    assert cli.main(["validate", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "pt_symmetry: ok" in out
    assert "critical lambda: 1" in out
    assert "101 points" in out


def test_validate_rejects_asymmetric_hoppings(tmp_path, capsys):
    cfg = write_json(tmp_path / "broken.json", {
        "model": {
            "hoppings": {
                "rho": {"0": [0.0, 1.0]},
                "eta": {"0": [0.0, -1.0]},
                "sigma": {"-1": [0.7, 0.0]},
                "theta": {"1": [0.5, 0.0]},
            },
            "lambda": 0.3,
        },
        "axis": "lambda",
        "grid": {"start": 0.0, "stop": 1.0, "count": 11},
        "omega": 0.1,
    })
    assert cli.main(["validate", "--config", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_validate_rejects_empty_grid(tmp_path, capsys):
    cfg = write_json(tmp_path / "empty.json",
                     {**EX1_SWEEP, "grid": {"start": 0.0, "stop": 1.0, "count": 0}})
    assert cli.main(["validate", "--config", cfg]) == 2
    assert "at least 2 points" in capsys.readouterr().err


def test_malformed_json_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": {},\n "axis" "lambda"}\n')
    assert cli.main(["validate", "--config", str(bad)]) == 2
    assert "parse error at line 2" in capsys.readouterr().err


def test_sweep_end_to_end(tmp_path, capsys):
    cfg = write_json(tmp_path / "small.json", EX1_SWEEP)
    out = tmp_path / "run.csv"
    assert cli.main(["sweep", "--config", cfg, "--out", str(out),
                     "--threads", "2"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ptcycle.sweep.CSV_HEADER
    assert len(lines) == 3
    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["threads"] == 2
    assert manifest["failures"] == 0
    assert "wrote 2 rows" in capsys.readouterr().out


def test_sweep_failures_exit_3_but_write_csv(tmp_path, capsys, monkeypatch):
    def fragile(model, omega, rtol=None):
        if model.lam > 0.5:
            raise RuntimeError("boom")
        return _floquet_core(model, omega, rtol=rtol)

    monkeypatch.setattr(ptcycle.sweep, "_floquet_core", fragile)
    cfg = write_json(tmp_path / "small.json", EX1_SWEEP)
    out = tmp_path / "run.csv"
    assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 3
    assert len(out.read_text().splitlines()) == 3
    captured = capsys.readouterr()
    assert "failed" in captured.out
    assert "NaN rows kept" in captured.err


def test_fig_subcommands_build_presets(stub_sweep, tmp_path):
    assert cli.main(["fig1"]) == 0
    config, out = stub_sweep[-1]
    assert config == fig_preset(1)
    assert out == Path("fig1.csv")

    target = tmp_path / "three.csv"
    assert cli.main(["fig3", "--omega", "0.05", "--out", str(target),
                     "--threads", "3"]) == 0
    config, out = stub_sweep[-1]
    assert config == fig_preset(3, omega=0.05, threads=3)
    assert out == target


def test_thread_env_default_and_flag_override(stub_sweep, monkeypatch, capsys):
    monkeypatch.setenv("PTCYCLE_THREADS", "6")
    assert cli.main(["fig2"]) == 0
    assert stub_sweep[-1][0].threads == 6
    assert cli.main(["fig2", "--threads", "2"]) == 0
    assert stub_sweep[-1][0].threads == 2
    monkeypatch.setenv("PTCYCLE_THREADS", "lots")
    assert cli.main(["fig2"]) == 2
    assert "PTCYCLE_THREADS" in capsys.readouterr().err


def test_ws_writes_ladder_csv(tmp_path, capsys):
    desc = write_json(tmp_path / "model2.json", {
        "builtin": {"example": 2, "params": {"t1": 1.0, "t2": 0.5}},
        "lambda": 0.25,
    })
    out = tmp_path / "ladder.csv"
    assert cli.main(["ws", "--config", desc, "--force", "0.25",
                     "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "l,branch,re_E,im_E"
    assert len(lines) == 11
    plus = [float(line.split(",")[2]) for line in lines[1:] if ",+," in line]
    spacings = {b - a for a, b in zip(plus, plus[1:])}
    assert spacings == {0.25}
    assert "t1_period:" in capsys.readouterr().out

    shifted = tmp_path / "shifted.csv"
    assert cli.main(["ws", "--config", desc, "--force", "0.25",
                     "--lambda", "1.4", "--out", str(shifted)]) == 0
    assert shifted.read_text() != out.read_text()


def test_ws_requires_force(tmp_path, capsys):
    desc = write_json(tmp_path / "model2.json",
                      {"builtin": {"example": 2}, "lambda": 0.1})
    assert cli.main(["ws", "--config", desc]) == 2
    capsys.readouterr()


def test_ws_numerical_failure_exits_3(tmp_path, capsys, monkeypatch):
    def sick(model, force):
        raise IntegrationError("stepper stalled", t_reached=0.3)

    monkeypatch.setattr(cli, "ws_spectrum", sick)
    desc = write_json(tmp_path / "model2.json",
                      {"builtin": {"example": 2}, "lambda": 0.1})
    assert cli.main(["ws", "--config", desc, "--force", "0.1"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_dynamics_end_to_end(tmp_path, capsys):
    desc = write_json(tmp_path / "slow2.json", {
        "builtin": {"example": 2, "params": {"t1": 0.05, "t2": 0.02}},
        "lambda": 0.0,
    })
    base = tmp_path / "run"
    assert cli.main(["dynamics", "--config", desc, "--force", "0.1",
                     "--tol", "1e-6", "--out", str(base)]) == 0
    report = json.loads((tmp_path / "run.json").read_text())
    t1 = 2.0 * math.pi / 0.1
    assert report["classification"] == "Periodic-T1"
    assert report["t1_period"] == pytest.approx(t1)
    assert report["transient"] == 0.0
    assert report["min_fidelity"] > 0.999
    assert report["vector_period"] == pytest.approx(2.0 * t1, rel=1e-6)
    csv_lines = (tmp_path / "run.csv").read_text().splitlines()
    assert csv_lines[0].startswith("t,pa_")
    assert float(csv_lines[1].split(",")[0]) == 0.0
    assert "classification: Periodic-T1" in capsys.readouterr().out
