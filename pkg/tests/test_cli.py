"""End-to-end tests for the command-line front end."""

import json
import math

import numpy as np
import pytest

from fiberpol import (
    DissipativeParams,
    NumericalFailureError,
    build_generator,
    mueller_exact,
)
from fiberpol.cli import main, parse_config

PARAMS_BLOCK = {
    "a": 0.8,
    "b": 0.12,
    "c": -0.05,
    "alpha": 0.6,
    "beta": 0.2,
    "gamma": 0.9,
    "omega": 1.7,
}


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def diagnostics(err):
    return [json.loads(line) for line in err.splitlines() if line]


def csv_parts(text):
    lines = text.split("\n")
    assert lines[-1] == ""
    assert lines[0].startswith("# metadata: ")
    metadata = json.loads(lines[0][len("# metadata: "):])
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:-1]]
    return metadata, header, rows


def test_parse_minimal_config():
    cfg = parse_config(json.dumps({"mode": "evolve", "params": PARAMS_BLOCK, "times": [0.5]}))
    assert cfg.mode == "evolve"
    assert cfg.params_omega == (0.0, 0.0, 1.7)
    assert cfg.times == (0.5,)
    assert np.array_equal(cfg.initial.as_array(), [1.0, 0.0, 0.0])
    assert cfg.output_format == "csv"
    assert cfg.output_path is None
    assert cfg.trajectory is None


def test_syntax_error_reports_location(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"mode": "evolve",}')
    code, out, err = run_cli(capsys, ["--config", str(path)])
    assert code == 2
    assert out == ""
    (diag,) = diagnostics(err)
    assert diag["level"] == "error"
    assert diag["code"] == "invalid-input"
    assert "config syntax error at line 1, column" in diag["message"]


def test_unknown_fields_rejected(tmp_path, capsys):
    cfg = {"mode": "evolve", "params": PARAMS_BLOCK, "times": [0.1], "extra": 1}
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert "unknown field" in diagnostics(err)[0]["message"]

    cfg = {
        "mode": "evolve",
        "noise": {"g": [0.1, 0.1, 0.1], "lam": [1, 1, 1], "foo": 2},
        "precession": {"omega0": 1.0},
        "times": [0.1],
    }
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 2
    message = diagnostics(err)[0]["message"]
    assert "unknown field" in message and "foo" in message


def test_noise_validation_propagates(tmp_path, capsys):
    cfg = {
        "mode": "evolve",
        "noise": {"g": [0.1, 0.1, 0.1], "lam": [1.0, 0.0, 1.0]},
        "precession": {"omega0": 1.0},
        "times": [0.1],
    }
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert out == ""
    assert "lam[1] must be positive" in diagnostics(err)[0]["message"]


def test_route_conflicts(tmp_path, capsys):
    both = {
        "mode": "evolve",
        "noise": {"g": [0.1, 0.1, 0.1], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
        "params": PARAMS_BLOCK,
        "times": [0.1],
    }
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, both)])
    assert code == 2
    assert "exactly one of noise or params" in diagnostics(err)[0]["message"]

    neither = {"mode": "evolve", "times": [0.1]}
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, neither)])
    assert code == 2
    assert "exactly one of noise or params" in diagnostics(err)[0]["message"]


def test_precession_noise_pairing(tmp_path, capsys):
    missing = {
        "mode": "evolve",
        "noise": {"g": [0.1, 0.1, 0.1], "lam": [1, 1, 1]},
        "times": [0.1],
    }
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, missing)])
    assert code == 2
    assert "precession is required alongside noise" in diagnostics(err)[0]["message"]

    orphan = {
        "mode": "evolve",
        "params": PARAMS_BLOCK,
        "precession": {"omega0": 1.0},
        "times": [0.1],
    }
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, orphan)])
    assert code == 2
    assert "only meaningful together with noise" in diagnostics(err)[0]["message"]


def test_times_validation(tmp_path, capsys):
    base = {"mode": "evolve", "params": PARAMS_BLOCK}
    for times, fragment in (
        ([0.3, 0.3], "strictly increasing"),
        ([-0.1, 0.2], "non-negative"),
        ([], "must not be empty"),
        ({"start": 0.0, "stop": 1.0, "count": 1}, "at least 2"),
        ({"start": 1.0, "stop": 0.5, "count": 3}, "must exceed"),
    ):
        cfg = dict(base, times=times)
        code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
        assert code == 2
        assert fragment in diagnostics(err)[0]["message"]

    missing = dict(base)
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, missing)])
    assert code == 2
    assert "requires times" in diagnostics(err)[0]["message"]


def test_time_grid_expansion(tmp_path, capsys):
    cfg = {
        "mode": "evolve",
        "params": PARAMS_BLOCK,
        "times": {"start": 0.0, "stop": 1.0, "count": 5},
    }
    code, out, _ = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    _, _, rows = csv_parts(out)
    assert [float(r[0]) for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_initial_must_be_physical(tmp_path, capsys):
    cfg = {"mode": "evolve", "params": PARAMS_BLOCK, "times": [0.1], "initial": [1.1, 0, 0]}
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert "unit ball" in diagnostics(err)[0]["message"]


def test_evolve_csv_matches_library(tmp_path, capsys):
    times = [0.0, 0.25, 1.3]
    initial = [0.4, -0.2, 0.5]
    cfg = {"mode": "evolve", "params": PARAMS_BLOCK, "times": times, "initial": initial}
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    assert err == ""
    metadata, header, rows = csv_parts(out)
    assert header == ["t", "rho1", "rho2", "rho3"]
    assert metadata["mode"] == "evolve"
    assert metadata["seed"] is None
    assert len(metadata["config_digest"]) == 64

    params = DissipativeParams(a=0.8, b=0.12, c=-0.05, alpha=0.6, beta=0.2, gamma=0.9)
    gen = build_generator(params, np.array([0.0, 0.0, 1.7]))
    s0 = np.array(initial)
    # 17 significant digits round-trip doubles exactly
    for row, t in zip(rows, times):
        expected = mueller_exact(gen, t).matrix @ s0
        assert float(row[0]) == t
        for cell, value in zip(row[1:], expected):
            assert float(cell) == value


def test_reruns_are_byte_identical(tmp_path, capsys):
    cfg = {
        "mode": "montecarlo",
        "noise": {"g": [0.01, 0.01, 0.01], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
        "trajectory": {"dt": 0.01, "n_steps": 30, "n_traj": 100, "seed": 12},
    }
    path = write_config(tmp_path, cfg)
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["--config", path, "--out", str(out_a)]) == 0
    assert main(["--config", path, "--out", str(out_b)]) == 0
    capsys.readouterr()
    assert out_a.read_bytes() == out_b.read_bytes()
    assert b"\r" not in out_a.read_bytes()


def test_csv_and_json_carry_identical_numbers(tmp_path, capsys):
    cfg = {"mode": "mueller", "params": PARAMS_BLOCK, "times": [0.2, 0.7]}
    path = write_config(tmp_path, cfg)
    code, out_csv, _ = run_cli(capsys, ["--config", path])
    assert code == 0
    code, out_json, _ = run_cli(capsys, ["--config", path, "--format", "json"])
    assert code == 0

    _, header, rows = csv_parts(out_csv)
    doc = json.loads(out_json)
    assert doc["columns"] == header
    assert len(doc["records"]) == len(rows)
    for row, record in zip(rows, doc["records"]):
        for name, cell in zip(header, row):
            assert float(cell) == record[name]


def test_cp_check_params_route_negative(tmp_path, capsys):
    params = {"a": 1.0, "b": 0.0, "c": 0.0, "alpha": 1.0, "beta": 0.0, "gamma": 3.0, "omega": 5.0}
    cfg = {"mode": "cp-check", "params": params}
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    assert err == ""
    _, header, rows = csv_parts(out)
    assert header == [
        "two_r", "two_s", "two_t", "rs_minus_b2", "rt_minus_c2",
        "st_minus_beta2", "det", "min_eig", "completely_positive", "noise_residual",
    ]
    (row,) = rows
    record = dict(zip(header, row))
    assert float(record["two_t"]) == -1.0
    assert float(record["min_eig"]) < 0.0
    assert record["completely_positive"] == "false"
    # explicit-generator route has no underlying noise model to score
    assert record["noise_residual"] == ""


def test_cp_check_noise_route_positive(tmp_path, capsys):
    cfg = {
        "mode": "cp-check",
        "noise": {"g": [0.5, 0.5, 0.2], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
    }
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    assert err == ""
    _, header, rows = csv_parts(out)
    record = dict(zip(header, rows[0]))
    assert record["completely_positive"] == "true"
    for name in ("two_r", "two_s", "two_t", "rs_minus_b2", "rt_minus_c2", "st_minus_beta2", "det"):
        assert float(record[name]) >= 0.0
    assert float(record["noise_residual"]) >= 0.0
    assert float(record["min_eig"]) >= -1e-12


def test_cp_check_tilted_axis_warns(tmp_path, capsys):
    cfg = {
        "mode": "cp-check",
        "noise": {"g": [0.5, 0.5, 0.2], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0, "n": [1.0, 0.0, 0.0]},
    }
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    (diag,) = diagnostics(err)
    assert diag["level"] == "warning"
    assert diag["code"] == "no-noise-residual"
    _, header, rows = csv_parts(out)
    record = dict(zip(header, rows[0]))
    assert record["noise_residual"] == ""
    assert record["completely_positive"] in ("true", "false")


def test_experiment_gamma_dominates(tmp_path, capsys):
    params = {"a": 1.0, "b": 0.0, "c": 0.0, "alpha": 1.0, "beta": 0.0, "gamma": 3.0, "omega": 5.0}
    cfg = {"mode": "experiment", "params": params, "times": [0.1, 0.2, 0.4]}
    code, out, _ = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    _, header, rows = csv_parts(out)
    assert header == ["t", "r_value", "r_closed", "verdict"]
    assert len(rows) == 3
    for row in rows:
        record = dict(zip(header, row))
        assert float(record["r_value"]) > 1.0
        assert record["verdict"] == "false"


def test_experiment_singular_time_skipped(tmp_path, capsys):
    params = {"a": 1.0, "b": 0.0, "c": 0.0, "alpha": 1.0, "beta": 0.0, "gamma": 2.0, "omega": 1.0}
    cfg = {"mode": "experiment", "params": params, "times": [0.3, 0.8, math.pi / 2]}
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    diags = diagnostics(err)
    assert any(d["code"] == "singular-time" and "point skipped" in d["message"] for d in diags)
    _, _, rows = csv_parts(out)
    assert [float(r[0]) for r in rows] == [0.3, 0.8]


def test_experiment_needs_axis3(tmp_path, capsys):
    params = dict(PARAMS_BLOCK, omega=[1.0, 0.0, 0.5])
    cfg = {"mode": "experiment", "params": params, "times": [0.1]}
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert "requires precession about axis 3" in diagnostics(err)[0]["message"]


def test_montecarlo_row_counts(tmp_path, capsys):
    cfg = {
        "mode": "montecarlo",
        "noise": {"g": [0.01, 0.01, 0.01], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
        "trajectory": {"dt": 0.01, "n_steps": 50, "n_traj": 100, "seed": 5},
    }
    code, out, _ = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    metadata, header, rows = csv_parts(out)
    assert header == ["t", "mean1", "mean2", "mean3", "stderr1", "stderr2", "stderr3"]
    assert len(rows) == 51
    assert metadata["seed"] == 5

    cfg["trajectory"]["double_pass"] = True
    code, out, _ = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    _, _, rows = csv_parts(out)
    assert len(rows) == 101


def test_montecarlo_requires_trajectory(tmp_path, capsys):
    cfg = {
        "mode": "montecarlo",
        "noise": {"g": [0.01, 0.01, 0.01], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
    }
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert "requires a trajectory block" in diagnostics(err)[0]["message"]


def test_compare_smoke_and_metadata(tmp_path, capsys):
    cfg = {
        "mode": "compare",
        "noise": {"g": [0.0001, 0.0001, 0.0001], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
        "trajectory": {"dt": 0.01, "n_steps": 50, "n_traj": 100, "seed": 8},
        "output": {"format": "json"},
    }
    code, out, _ = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"][:4] == ["t", "mc1", "mc2", "mc3"]
    assert isinstance(doc["metadata"]["max_abs_z"], float)
    assert 0.0 <= doc["metadata"]["frac_above_3"] <= 1.0


def test_seed_override(tmp_path, capsys):
    cfg = {
        "mode": "montecarlo",
        "noise": {"g": [0.01, 0.01, 0.01], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
        "trajectory": {"dt": 0.01, "n_steps": 10, "n_traj": 100, "seed": 5},
    }
    path = write_config(tmp_path, cfg)
    code, out, _ = run_cli(capsys, ["--config", path, "--seed", "99"])
    assert code == 0
    metadata, _, _ = csv_parts(out)
    assert metadata["seed"] == 99


def test_seed_needs_trajectory(tmp_path, capsys):
    cfg = {"mode": "evolve", "params": PARAMS_BLOCK, "times": [0.1]}
    code, _, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg), "--seed", "7"])
    assert code == 2
    assert "--seed requires a trajectory block" in diagnostics(err)[0]["message"]


def test_mode_override_revalidates(tmp_path, capsys):
    cfg = {"mode": "evolve", "params": PARAMS_BLOCK, "times": [0.1]}
    path = write_config(tmp_path, cfg)
    code, _, err = run_cli(capsys, ["--config", path, "--mode", "montecarlo"])
    assert code == 2
    assert "needs noise and precession" in diagnostics(err)[0]["message"]


def test_mode_override_accepted(tmp_path, capsys):
    cfg = {
        "mode": "evolve",
        "noise": {"g": [0.1, 0.1, 0.1], "lam": [1, 1, 1]},
        "precession": {"omega0": 1.0},
        "times": [0.1, 0.5],
    }
    path = write_config(tmp_path, cfg)
    code, out, _ = run_cli(capsys, ["--config", path, "--mode", "mueller"])
    assert code == 0
    metadata, header, _ = csv_parts(out)
    assert metadata["mode"] == "mueller"
    assert header[:2] == ["t", "m11"]


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def raiser(gen, t):
        raise NumericalFailureError("synthetic propagator breakdown")

    monkeypatch.setattr("fiberpol.cli.mueller_exact", raiser)
    cfg = {"mode": "evolve", "params": PARAMS_BLOCK, "times": [0.1]}
    code, out, err = run_cli(capsys, ["--config", write_config(tmp_path, cfg)])
    assert code == 3
    assert out == ""
    (diag,) = diagnostics(err)
    assert diag["code"] == "numerical-failure"
    assert "synthetic propagator breakdown" in diag["message"]


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run_cli(capsys, ["--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "cannot read config" in diagnostics(err)[0]["message"]
