"""Command-line front end: JSON config in, CSV or JSON table out.

Usage::

    fiberpol --config run.json [--mode MODE] [--seed N] [--out PATH]
             [--format csv|json]

Config schema (JSON object; unknown keys are rejected)::

    {
      "mode": "evolve" | "mueller" | "cp-check" | "experiment"
              | "montecarlo" | "compare",
      "noise":      {"g": [g1,g2,g3], "lam": [l1,l2,l3],
                     "mean": [m1,m2,m3]},            # mean optional
      "precession": {"omega0": w0, "n": [n1,n2,n3]}, # n optional, default axis 3
      "params":     {"a":..,"b":..,"c":..,"alpha":..,"beta":..,"gamma":..,
                     "omega": w or [w1,w2,w3]},      # explicit-generator route
      "times":      [t1, t2, ...] | {"start": s, "stop": e, "count": n},
      "initial":    [s1, s2, s3],                    # default [1, 0, 0]
      "trajectory": {"dt":.., "n_steps":.., "n_traj":.., "seed":..,
                     "double_pass": false},
      "output":     {"path": "out.csv", "format": "csv" | "json"}
    }

Modes that need a generator (evolve, mueller, cp-check, experiment)
take exactly one of "noise"+"precession" or "params"; the stochastic
modes (montecarlo, compare) take "noise"+"precession"+"trajectory" and
no explicit params.  Command-line flags override the corresponding
config fields.

Output contract: the first CSV line is a "# metadata: {...}" record
(config digest, package version, seed), then a header row, then data
rows, LF line endings; JSON output is an object with the same metadata,
the column list, and an array of records.  All floating-point values
are written with 17 significant digits in both formats, so a run is
byte-reproducible and the two encodings carry identical numbers.
Verdicts are emitted as data (true/false), never as exit codes.
Diagnostics go to stderr as one JSON record per line.  Exit codes:
0 success, 2 invalid input or configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    InvalidInputError,
    NumericalFailureError,
    UnsupportedConfigurationError,
)
from .experiment import r_scan
from .generator import (
    DissipativeParams,
    build_generator,
    cp_inequalities,
    is_completely_positive,
    kossakowski_from_params,
    params_from_kossakowski,
)
from .montecarlo import (
    TrajectoryConfig,
    ensemble_average,
    mc_double_pass,
    mc_vs_master_report,
)
from .noise import (
    FreePrecession,
    NoiseSpec,
    c_matrix_closed,
    effective_hamiltonian,
    noise_cp_condition,
)
from .propagator import mueller_exact
from .states import StokesVector

MODES = ("evolve", "mueller", "cp-check", "experiment", "montecarlo", "compare")
_GENERATOR_MODES = ("evolve", "mueller", "cp-check", "experiment")
_STOCHASTIC_MODES = ("montecarlo", "compare")
_TIMED_MODES = ("evolve", "mueller", "experiment")


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run description."""

    mode: str
    noise: NoiseSpec | None
    precession: FreePrecession | None
    params: DissipativeParams | None
    params_omega: tuple[float, float, float] | None
    times: tuple[float, ...] | None
    initial: StokesVector
    trajectory: TrajectoryConfig | None
    round_trip: bool
    output_path: str | None
    output_format: str


def _fail(message: str) -> ConfigError:
    return ConfigError(message)


def _require_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"{path} must be a number")
    return float(value)


def _require_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(f"{path} must be an integer")
    return value


def _require_vec3(value, path: str) -> tuple[float, float, float]:
    if not isinstance(value, list) or len(value) != 3:
        raise _fail(f"{path} must be a list of 3 numbers")
    return tuple(_require_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _check_keys(obj: dict, allowed: tuple[str, ...], path: str):
    for key in obj:
        if key not in allowed:
            raise _fail(f"unknown field {path}{key!r}")


def _parse_times(value) -> tuple[float, ...]:
    if isinstance(value, list):
        if not value:
            raise _fail("times must not be empty")
        times = [_require_number(v, f"times[{i}]") for i, v in enumerate(value)]
    elif isinstance(value, dict):
        _check_keys(value, ("start", "stop", "count"), "times.")
        for key in ("start", "stop", "count"):
            if key not in value:
                raise _fail(f"times.{key} is required for a time grid")
        start = _require_number(value["start"], "times.start")
        stop = _require_number(value["stop"], "times.stop")
        count = _require_int(value["count"], "times.count")
        if count < 2:
            raise _fail("times.count must be at least 2")
        if not stop > start:
            raise _fail("times.stop must exceed times.start")
        times = list(np.linspace(start, stop, count))
    else:
        raise _fail("times must be a list of numbers or {start, stop, count}")
    if times[0] < 0.0:
        raise _fail("times must be non-negative")
    for earlier, later in zip(times, times[1:]):
        if not later > earlier:
            raise _fail("times must be strictly increasing")
    return tuple(times)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(
            f"config syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(obj, dict):
        raise _fail("config must be a JSON object")
    _check_keys(
        obj,
        ("mode", "noise", "precession", "params", "times", "initial", "trajectory", "output"),
        "",
    )

    mode = obj.get("mode")
    if mode not in MODES:
        raise _fail(f"mode must be one of {', '.join(MODES)}")

    noise = precession = None
    if "noise" in obj:
        block = obj["noise"]
        if not isinstance(block, dict):
            raise _fail("noise must be an object")
        _check_keys(block, ("g", "lam", "mean"), "noise.")
        for key in ("g", "lam"):
            if key not in block:
                raise _fail(f"noise.{key} is required")
        try:
            noise = NoiseSpec(
                g=_require_vec3(block["g"], "g"),
                lam=_require_vec3(block["lam"], "lam"),
                mean=_require_vec3(block["mean"], "mean") if "mean" in block else (0.0, 0.0, 0.0),
            )
        except InvalidInputError as exc:
            raise _fail(str(exc)) from exc
        if "precession" not in obj:
            raise _fail("precession is required alongside noise")
        pblock = obj["precession"]
        if not isinstance(pblock, dict):
            raise _fail("precession must be an object")
        _check_keys(pblock, ("omega0", "n"), "precession.")
        if "omega0" not in pblock:
            raise _fail("precession.omega0 is required")
        try:
            precession = FreePrecession(
                omega0=_require_number(pblock["omega0"], "precession.omega0"),
                n=_require_vec3(pblock["n"], "precession.n") if "n" in pblock else (0.0, 0.0, 1.0),
            )
        except InvalidInputError as exc:
            raise _fail(str(exc)) from exc
    elif "precession" in obj:
        raise _fail("precession is only meaningful together with noise")

    params = params_omega = None
    if "params" in obj:
        block = obj["params"]
        if not isinstance(block, dict):
            raise _fail("params must be an object")
        _check_keys(block, ("a", "b", "c", "alpha", "beta", "gamma", "omega"), "params.")
        for key in ("a", "b", "c", "alpha", "beta", "gamma", "omega"):
            if key not in block:
                raise _fail(f"params.{key} is required")
        params = DissipativeParams(
            a=_require_number(block["a"], "params.a"),
            b=_require_number(block["b"], "params.b"),
            c=_require_number(block["c"], "params.c"),
            alpha=_require_number(block["alpha"], "params.alpha"),
            beta=_require_number(block["beta"], "params.beta"),
            gamma=_require_number(block["gamma"], "params.gamma"),
        )
        w = block["omega"]
        if isinstance(w, list):
            params_omega = _require_vec3(w, "params.omega")
        else:
            params_omega = (0.0, 0.0, _require_number(w, "params.omega"))

    if mode in _GENERATOR_MODES:
        if (noise is None) == (params is None):
            raise _fail(f"mode {mode!r} needs exactly one of noise or params")
    else:
        if noise is None:
            raise _fail(f"mode {mode!r} needs noise and precession")
        if params is not None:
            raise _fail(f"mode {mode!r} derives its dynamics from noise; params is not allowed")

    times = _parse_times(obj["times"]) if "times" in obj else None
    if mode in _TIMED_MODES and times is None:
        raise _fail(f"mode {mode!r} requires times")

    initial = StokesVector(1.0, 0.0, 0.0)
    if "initial" in obj:
        vec = _require_vec3(obj["initial"], "initial")
        initial = StokesVector(*vec)
        if not initial.is_physical():
            raise _fail("initial must lie in the unit ball (within 1e-12)")

    trajectory = None
    round_trip = False
    if "trajectory" in obj:
        block = obj["trajectory"]
        if not isinstance(block, dict):
            raise _fail("trajectory must be an object")
        _check_keys(block, ("dt", "n_steps", "n_traj", "seed", "double_pass"), "trajectory.")
        for key in ("dt", "n_steps", "n_traj", "seed"):
            if key not in block:
                raise _fail(f"trajectory.{key} is required")
        if "double_pass" in block:
            if not isinstance(block["double_pass"], bool):
                raise _fail("trajectory.double_pass must be a boolean")
            round_trip = block["double_pass"]
        try:
            trajectory = TrajectoryConfig(
                dt=_require_number(block["dt"], "trajectory.dt"),
                n_steps=_require_int(block["n_steps"], "trajectory.n_steps"),
                n_traj=_require_int(block["n_traj"], "trajectory.n_traj"),
                seed=_require_int(block["seed"], "trajectory.seed"),
                initial=initial,
            )
        except InvalidInputError as exc:
            raise _fail(f"trajectory: {exc}") from exc
    if mode in _STOCHASTIC_MODES and trajectory is None:
        raise _fail(f"mode {mode!r} requires a trajectory block")

    output_path = None
    output_format = "csv"
    if "output" in obj:
        block = obj["output"]
        if not isinstance(block, dict):
            raise _fail("output must be an object")
        _check_keys(block, ("path", "format"), "output.")
        if "path" in block:
            if not isinstance(block["path"], str):
                raise _fail("output.path must be a string")
            output_path = block["path"]
        if "format" in block:
            if block["format"] not in ("csv", "json"):
                raise _fail("output.format must be 'csv' or 'json'")
            output_format = block["format"]

    return RunConfig(
        mode=mode,
        noise=noise,
        precession=precession,
        params=params,
        params_omega=params_omega,
        times=times,
        initial=initial,
        trajectory=trajectory,
        round_trip=round_trip,
        output_path=output_path,
        output_format=output_format,
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt_float(x: float) -> str:
    if math.isfinite(x):
        return f"{x:.17g}"
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _json_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value) if math.isfinite(value) else json.dumps(_fmt_float(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _canonical(value) -> str:
    """Canonical text of a config value, for digesting."""
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_canonical(value[k])}" for k in sorted(value))
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_canonical(v) for v in value) + "]"
    return _json_value(value)


def _effective_config(cfg: RunConfig) -> dict:
    out: dict = {"mode": cfg.mode, "initial": list(cfg.initial.as_array())}
    if cfg.noise is not None:
        out["noise"] = {"g": list(cfg.noise.g), "lam": list(cfg.noise.lam), "mean": list(cfg.noise.mean)}
        out["precession"] = {"omega0": cfg.precession.omega0, "n": list(cfg.precession.n)}
    if cfg.params is not None:
        p = cfg.params
        out["params"] = {
            "a": p.a, "b": p.b, "c": p.c,
            "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma,
            "omega": list(cfg.params_omega),
        }
    if cfg.times is not None:
        out["times"] = list(cfg.times)
    if cfg.trajectory is not None:
        t = cfg.trajectory
        out["trajectory"] = {
            "dt": t.dt, "n_steps": t.n_steps, "n_traj": t.n_traj,
            "seed": t.seed, "double_pass": cfg.round_trip,
        }
    return out


def _metadata(cfg: RunConfig) -> dict:
    digest = hashlib.sha256(_canonical(_effective_config(cfg)).encode()).hexdigest()
    return {
        "mode": cfg.mode,
        "version": __version__,
        "config_digest": digest,
        "seed": cfg.trajectory.seed if cfg.trajectory is not None else None,
    }


def _render_csv(metadata: dict, columns: list[str], rows: list[dict]) -> str:
    lines = ["# metadata: " + _json_value(metadata)]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _render_json(metadata: dict, columns: list[str], rows: list[dict]) -> str:
    parts = [
        '"metadata": ' + _json_value(metadata),
        '"columns": ' + _json_value(columns),
        '"records": ['
        + ", ".join(
            "{" + ", ".join(f"{json.dumps(c)}: {_json_value(r[c])}" for c in columns) + "}"
            for r in rows
        )
        + "]",
    ]
    return "{" + ", ".join(parts) + "}\n"


def _diagnostic(level: str, code: str, message: str):
    record = {"level": level, "code": code, "message": message}
    sys.stderr.write(_json_value(record) + "\n")


# ---------------------------------------------------------------------------
# mode handlers


def _generator_pieces(cfg: RunConfig):
    """(params, omega 3-vector) from whichever route the config supplies."""
    if cfg.params is not None:
        return cfg.params, np.array(cfg.params_omega)
    params = params_from_kossakowski(c_matrix_closed(cfg.noise, cfg.precession).symmetric_part())
    return params, effective_hamiltonian(cfg.noise, cfg.precession)


def _mode_evolve(cfg: RunConfig):
    params, omega = _generator_pieces(cfg)
    gen = build_generator(params, omega)
    s0 = cfg.initial.as_array()
    rows = []
    for t in cfg.times:
        s = mueller_exact(gen, t).matrix @ s0
        rows.append({"t": t, "rho1": s[0], "rho2": s[1], "rho3": s[2]})
    return ["t", "rho1", "rho2", "rho3"], rows, {}


def _mode_mueller(cfg: RunConfig):
    params, omega = _generator_pieces(cfg)
    gen = build_generator(params, omega)
    columns = ["t"] + [f"m{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    rows = []
    for t in cfg.times:
        m = mueller_exact(gen, t).matrix
        row = {"t": t}
        for i in range(3):
            for j in range(3):
                row[f"m{i + 1}{j + 1}"] = m[i, j]
        rows.append(row)
    return columns, rows, {}


def _mode_cp_check(cfg: RunConfig):
    params, _ = _generator_pieces(cfg)
    res = cp_inequalities(params)
    min_eig = float(np.linalg.eigvalsh(kossakowski_from_params(params).matrix)[0])
    noise_residual = None
    if cfg.noise is not None:
        try:
            noise_residual = noise_cp_condition(cfg.noise, cfg.precession)
        except UnsupportedConfigurationError as exc:
            _diagnostic("warning", "no-noise-residual", str(exc))
    row = {
        "two_r": res.two_r,
        "two_s": res.two_s,
        "two_t": res.two_t,
        "rs_minus_b2": res.rs_minus_b2,
        "rt_minus_c2": res.rt_minus_c2,
        "st_minus_beta2": res.st_minus_beta2,
        "det": res.det,
        "min_eig": min_eig,
        "completely_positive": is_completely_positive(params),
        "noise_residual": noise_residual,
    }
    return list(row.keys()), [row], {}


def _mode_experiment(cfg: RunConfig):
    params, omega = _generator_pieces(cfg)
    if abs(omega[0]) > 1e-12 or abs(omega[1]) > 1e-12:
        raise ConfigError("experiment mode requires precession about axis 3")
    scan = r_scan(params, float(omega[2]), cfg.times)
    for t in scan.singular_times:
        _diagnostic(
            "warning",
            "singular-time",
            f"R(t) denominator vanishes at t = {_fmt_float(t)}; point skipped",
        )
    rows = [
        {"t": r.t, "r_value": r.r_value, "r_closed": r.r_closed, "verdict": r.cp_verdict}
        for r in scan.results
    ]
    return ["t", "r_value", "r_closed", "verdict"], rows, {}


def _ensemble_rows(ens):
    rows = []
    for k in range(len(ens.times)):
        rows.append(
            {
                "t": float(ens.times[k]),
                "mean1": float(ens.mean_stokes[k, 0]),
                "mean2": float(ens.mean_stokes[k, 1]),
                "mean3": float(ens.mean_stokes[k, 2]),
                "stderr1": float(ens.stderr[k, 0]),
                "stderr2": float(ens.stderr[k, 1]),
                "stderr3": float(ens.stderr[k, 2]),
            }
        )
    return rows


def _mode_montecarlo(cfg: RunConfig):
    runner = mc_double_pass if cfg.round_trip else ensemble_average
    ens = runner(cfg.noise, cfg.precession, cfg.trajectory)
    columns = ["t", "mean1", "mean2", "mean3", "stderr1", "stderr2", "stderr3"]
    return columns, _ensemble_rows(ens), {}


def _mode_compare(cfg: RunConfig):
    report = mc_vs_master_report(cfg.noise, cfg.precession, cfg.trajectory)
    columns = ["t"]
    for stem in ("mc", "stderr", "master", "z"):
        columns += [f"{stem}{i}" for i in (1, 2, 3)]
    rows = []
    for k in range(len(report.times)):
        row = {"t": float(report.times[k])}
        for stem, arr in (
            ("mc", report.mc_mean),
            ("stderr", report.mc_stderr),
            ("master", report.master),
            ("z", report.z),
        ):
            for i in range(3):
                row[f"{stem}{i + 1}"] = float(arr[k, i])
        rows.append(row)
    extras = {"max_abs_z": report.max_abs_z, "frac_above_3": report.frac_above_3}
    return columns, rows, extras


_HANDLERS = {
    "evolve": _mode_evolve,
    "mueller": _mode_mueller,
    "cp-check": _mode_cp_check,
    "experiment": _mode_experiment,
    "montecarlo": _mode_montecarlo,
    "compare": _mode_compare,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration and write its output table."""
    columns, rows, extras = _HANDLERS[cfg.mode](cfg)
    metadata = _metadata(cfg)
    metadata.update(extras)
    render = _render_csv if cfg.output_format == "csv" else _render_json
    text = render(metadata, columns, rows)
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output_path, "w", newline="") as handle:
            handle.write(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fiberpol",
        description="Polarization decoherence in a noisy fiber: propagators, "
        "complete-positivity tests and stochastic cross-checks.",
    )
    parser.add_argument("--config", required=True, help="path to a JSON run configuration")
    parser.add_argument("--mode", choices=MODES, help="override the configured mode")
    parser.add_argument("--seed", type=int, help="override the trajectory seed")
    parser.add_argument("--out", help="override the output path")
    parser.add_argument("--format", choices=("csv", "json"), help="override the output format")
    args = parser.parse_args(argv)

    try:
        try:
            with open(args.config) as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        cfg = parse_config(text)
        if args.mode is not None and args.mode != cfg.mode:
            # re-validate under the new mode: requirements differ per mode
            obj = json.loads(text)
            obj["mode"] = args.mode
            cfg = parse_config(json.dumps(obj))
        if args.seed is not None:
            if cfg.trajectory is None:
                raise ConfigError("--seed requires a trajectory block")
            cfg = dataclasses.replace(
                cfg, trajectory=dataclasses.replace(cfg.trajectory, seed=args.seed)
            )
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_path=args.out)
        if args.format is not None:
            cfg = dataclasses.replace(cfg, output_format=args.format)
        return run(cfg)
    except (ConfigError, InvalidInputError, UnsupportedConfigurationError) as exc:
        _diagnostic("error", "invalid-input", str(exc))
        return 2
    except NumericalFailureError as exc:
        _diagnostic("error", "numerical-failure", str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
