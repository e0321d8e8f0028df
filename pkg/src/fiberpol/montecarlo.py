"""Brute-force stochastic-trajectory cross-check of the averaged dynamics.

Instead of averaging the noise analytically, this module simulates it:
each trajectory carries an independent Ornstein-Uhlenbeck realization
of the random field F(t), held piecewise constant over each dt step
(sampled at the step start), and the polarization is conjugated by the
exact step unitary U = exp(-i (H0 + F . sigma) dt).  For a traceless
Hermitian generator that conjugation is, on the Bloch vector, the
Rodrigues rotation about v = (omega0 / 2) n + F by the angle 2 |v| dt,
so every trajectory stays exactly pure and the only approximations are
the step discretization of F and the finite ensemble.  Ensemble means
converge to the master-equation solution in the weak-coupling regime
(operationally, resonance weights Lam_i of order 0.01 or below).

Determinism contract
--------------------
Trajectory j draws all of its normals from a counter-based Philox
stream keyed by (seed, j), independent of every other trajectory and of
how work is scheduled.  Trajectories are processed in fixed-size blocks
(_BLOCK); each block accumulates running mean and squared-deviation
moments in trajectory order, and blocks are merged in block order, so
ensemble means and standard errors are bit-identical for any worker
count at a fixed seed.  The running-moment form also keeps the variance
of an ensemble of identical trajectories at exactly zero, which the
zero-noise limit relies on.

Draw order per trajectory and segment: one (n_steps + 1, 3) block of
standard normals; row 0 initializes F from its stationary law
N(mean, G), row k relaxes F to time k dt.  A round trip draws a second
such block for the return pass: the return-pass field is a fresh
stationary realization, not a time-reversed replay, because the flight
time far exceeds the noise correlation time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedConfigurationError
from .generator import params_from_kossakowski
from .noise import FreePrecession, NoiseSpec, c_matrix_closed, effective_hamiltonian
from .propagator import mueller_exact
from .states import StokesVector

_BLOCK = 256
_SEED_LIMIT = 2**64
#: |simulation - reference| below this counts as exact agreement (z = 0)
Z_ABS_TOL = 1e-9
STABILITY_LIMIT = 0.05


@dataclass(frozen=True)
class TrajectoryConfig:
    """Discretization and ensemble-size choices for a stochastic run."""

    dt: float
    n_steps: int
    n_traj: int
    seed: int
    initial: StokesVector

    def __post_init__(self):
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "n_traj", int(self.n_traj))
        object.__setattr__(self, "seed", int(self.seed))
        if not isinstance(self.initial, StokesVector):
            object.__setattr__(self, "initial", StokesVector.from_array(self.initial))
        if not self.dt > 0.0:
            raise InvalidInputError("dt must be positive")
        if self.n_steps < 1:
            raise InvalidInputError("n_steps must be at least 1")
        if self.n_traj < 100:
            raise InvalidInputError("n_traj must be at least 100")
        if not 0 <= self.seed < _SEED_LIMIT:
            raise InvalidInputError("seed must fit in 64 bits")
        if not self.initial.is_physical():
            raise InvalidInputError("initial Stokes vector exceeds the unit ball beyond 1e-12")

    def check_resolution(self, spec: NoiseSpec, fp: FreePrecession):
        """Reject steps too coarse for the fastest scale in the problem."""
        scale = max(
            max(spec.lam),
            abs(fp.omega0),
            max(math.sqrt(v) for v in spec.g),
        )
        if self.dt * scale > STABILITY_LIMIT * (1.0 + 1e-12):
            raise InvalidInputError(
                f"dt * max(lam_i, omega0, sqrt(G_i)) = {self.dt * scale:.4g} exceeds "
                f"{STABILITY_LIMIT}; use a smaller dt"
            )


@dataclass(frozen=True)
class EnsembleTrajectory:
    """Ensemble means of the Stokes components with their standard errors."""

    times: np.ndarray
    mean_stokes: np.ndarray
    stderr: np.ndarray
    n_traj: int

    def __post_init__(self):
        for name in ("times", "mean_stokes", "stderr"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class MCComparisonReport:
    """Componentwise z-scores of ensemble means against the averaged dynamics."""

    times: np.ndarray
    mc_mean: np.ndarray
    mc_stderr: np.ndarray
    master: np.ndarray
    z: np.ndarray
    max_abs_z: float
    frac_above_3: float

    def __post_init__(self):
        for name in ("times", "mc_mean", "mc_stderr", "master", "z"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def ou_step(f_prev, g, lam, dt, noise, mean=0.0):
    """One exact Ornstein-Uhlenbeck update over a step of length dt.

    Given a standard-normal draw, returns

        mean + (f_prev - mean) e^{-lam dt}
             + sqrt(g (1 - e^{-2 lam dt})) noise,

    which reproduces the transition law of the process exactly for any
    dt: no Euler bias.  The stationary variance is g.  Scalars and
    arrays broadcast alike.
    """
    g = np.asarray(g, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(g < 0.0):
        raise InvalidInputError("g must be non-negative")
    if np.any(lam <= 0.0):
        raise InvalidInputError("lam must be positive")
    if not dt > 0.0:
        raise InvalidInputError("dt must be positive")
    decay = np.exp(-lam * dt)
    sigma = np.sqrt(g * (1.0 - decay**2))
    return mean + (f_prev - mean) * decay + sigma * noise


def _traj_rng(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _run_segment(bloch, field, normals, axis_term, mean, decay, step_sigma, dt, out):
    """Advance a block one segment, recording each post-step state into out."""
    n_steps = normals.shape[1] - 1
    for k in range(n_steps):
        v = axis_term + field
        vnorm = np.sqrt(np.sum(v * v, axis=1))
        theta = 2.0 * dt * vnorm
        cos_t = np.cos(theta)
        sin_t = np.sin(theta)
        unit = v / np.maximum(vnorm, 1e-300)[:, None]
        along = np.sum(unit * bloch, axis=1)
        cross = np.cross(unit, bloch)
        bloch = (
            cos_t[:, None] * bloch
            + ((1.0 - cos_t) * along)[:, None] * unit
            + sin_t[:, None] * cross
        )
        out[:, k] = bloch
        field = mean + (field - mean) * decay + step_sigma * normals[:, k + 1]
    return bloch


def _block_states(spec: NoiseSpec, fp: FreePrecession, cfg: TrajectoryConfig,
                  j0: int, j1: int, round_trip: bool) -> np.ndarray:
    """All recorded states of trajectories [j0, j1), shape (blk, rows, 3)."""
    blk = j1 - j0
    n = cfg.n_steps
    g = np.array(spec.g)
    lam = np.array(spec.lam)
    mean = np.array(spec.mean)
    decay = np.exp(-lam * cfg.dt)
    step_sigma = np.sqrt(g * (1.0 - decay**2))
    stationary_sigma = np.sqrt(g)
    axis_term = 0.5 * fp.omega0 * np.array(fp.n)

    gens = [_traj_rng(cfg.seed, j) for j in range(j0, j1)]
    normals = np.stack([gen.standard_normal((n + 1, 3)) for gen in gens])

    rows = 2 * n + 1 if round_trip else n + 1
    states = np.empty((blk, rows, 3))
    states[:, 0] = cfg.initial.as_array()

    bloch = np.repeat(cfg.initial.as_array()[None, :], blk, axis=0)
    field = mean + stationary_sigma * normals[:, 0]
    bloch = _run_segment(bloch, field, normals, axis_term, mean, decay, step_sigma,
                         cfg.dt, states[:, 1:n + 1])
    if round_trip:
        normals = np.stack([gen.standard_normal((n + 1, 3)) for gen in gens])
        field = mean + stationary_sigma * normals[:, 0]
        _run_segment(bloch, field, normals, -axis_term, mean, decay, step_sigma,
                     cfg.dt, states[:, n + 1:])
    return states


def _block_moments(states: np.ndarray):
    """Running mean and squared deviations over axis 0 (Welford).

    Computed in trajectory order; an ensemble of identical trajectories
    yields squared deviations of exactly zero, with no cancellation.
    """
    mean = states[0].copy()
    m2 = np.zeros_like(mean)
    for k in range(1, states.shape[0]):
        delta = states[k] - mean
        mean += delta / (k + 1)
        m2 += delta * (states[k] - mean)
    return states.shape[0], mean, m2


def _ensemble(spec, fp, cfg, round_trip: bool, n_workers: int) -> EnsembleTrajectory:
    cfg.check_resolution(spec, fp)
    if n_workers < 1:
        raise InvalidInputError("n_workers must be at least 1")
    edges = list(range(0, cfg.n_traj, _BLOCK)) + [cfg.n_traj]

    def partials(b):
        states = _block_states(spec, fp, cfg, edges[b], edges[b + 1], round_trip)
        return _block_moments(states)

    if n_workers == 1:
        parts = [partials(b) for b in range(len(edges) - 1)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(partials, range(len(edges) - 1)))

    # merge block moments in block order: results do not depend on the
    # worker count, and identical blocks merge with delta exactly zero
    count, mean, m2 = parts[0]
    for b_count, b_mean, b_m2 in parts[1:]:
        total = count + b_count
        delta = b_mean - mean
        mean = mean + delta * (b_count / total)
        m2 = m2 + b_m2 + delta**2 * (count * b_count / total)
        count = total
    n = cfg.n_traj
    rows = 2 * cfg.n_steps + 1 if round_trip else cfg.n_steps + 1
    return EnsembleTrajectory(
        times=np.arange(rows) * cfg.dt,
        mean_stokes=mean,
        stderr=np.sqrt(m2 / (n - 1) / n),
        n_traj=n,
    )


def evolve_trajectory(spec: NoiseSpec, fp: FreePrecession, cfg: TrajectoryConfig,
                      traj_index: int) -> np.ndarray:
    """One noise realization's Bloch trajectory, shape (n_steps + 1, 3).

    Row k is the state after k steps; the norm of every row equals the
    initial norm to rounding because each step is an exact rotation.
    The realization depends only on (seed, traj_index).
    """
    if not 0 <= traj_index < cfg.n_traj:
        raise InvalidInputError("traj_index must lie in [0, n_traj)")
    cfg.check_resolution(spec, fp)
    return _block_states(spec, fp, cfg, traj_index, traj_index + 1, round_trip=False)[0]


def ensemble_average(spec: NoiseSpec, fp: FreePrecession, cfg: TrajectoryConfig,
                     n_workers: int = 1) -> EnsembleTrajectory:
    """Ensemble mean and standard error of the Stokes vector over n_traj runs."""
    return _ensemble(spec, fp, cfg, round_trip=False, n_workers=n_workers)


def mc_double_pass(spec: NoiseSpec, fp: FreePrecession, cfg: TrajectoryConfig,
                   n_workers: int = 1) -> EnsembleTrajectory:
    """Stochastic round trip: forward n_steps, mirror, back n_steps.

    The mirror reverses the precession (omega0 -> -omega0) while the
    return pass sees a fresh independent noise realization.  Restricted
    to precession about axis 3 with zero-mean noise, matching the
    closed-form return-pass treatment it is checked against.  The row at
    index n_steps is the state at the mirror, so a single run also
    contains the one-way ensemble.
    """
    n = fp.n
    if abs(n[0]) > 1e-12 or abs(n[1]) > 1e-12 or abs(n[2] - 1.0) > 1e-12:
        raise UnsupportedConfigurationError(
            f"round trips assume precession about the circular axis n = (0, 0, 1); got n = {n}"
        )
    if any(abs(m) > 1e-12 for m in spec.mean):
        raise UnsupportedConfigurationError(
            f"round trips assume zero-mean noise; got mean = {spec.mean}"
        )
    return _ensemble(spec, fp, cfg, round_trip=True, n_workers=n_workers)


def mc_vs_master_report(spec: NoiseSpec, fp: FreePrecession, cfg: TrajectoryConfig,
                        n_samples: int = 20, n_workers: int = 1) -> MCComparisonReport:
    """Compare ensemble means against the averaged (master-equation) solution.

    The reference path goes through the damping matrix, the effective
    precession vector and the exact matrix exponential; no closed-form
    shortcut is shared with the simulation.  z-scores are 0 wherever the
    two sides agree within 1e-9 absolutely (covers deterministic limits
    with zero variance), infinite where they disagree at zero standard
    error, and (mc - master) / stderr elsewhere.  In strong coupling the
    report simply shows large z: flagging the breakdown of the averaged
    description is an intended mode of use, not a failure.
    """
    if n_samples < 1:
        raise InvalidInputError("n_samples must be at least 1")
    ens = ensemble_average(spec, fp, cfg, n_workers=n_workers)
    idx = np.unique(np.round(np.linspace(0, cfg.n_steps, n_samples)).astype(int))
    params = params_from_kossakowski(c_matrix_closed(spec, fp).symmetric_part())
    omega_vec = effective_hamiltonian(spec, fp)
    from .generator import build_generator

    gen = build_generator(params, omega_vec)
    s0 = cfg.initial.as_array()
    master = np.stack([mueller_exact(gen, t).matrix @ s0 for t in ens.times[idx]])
    mc = ens.mean_stokes[idx]
    err = ens.stderr[idx]
    diff = mc - master
    z = np.zeros_like(diff)
    exact = np.abs(diff) <= Z_ABS_TOL
    finite = ~exact & (err > 0.0)
    z[finite] = diff[finite] / err[finite]
    blown = ~exact & (err <= 0.0)
    z[blown] = np.sign(diff[blown]) * np.inf
    return MCComparisonReport(
        times=ens.times[idx],
        mc_mean=mc,
        mc_stderr=err,
        master=master,
        z=z,
        max_abs_z=float(np.max(np.abs(z))),
        frac_above_3=float(np.mean(np.abs(z) > 3.0)),
    )
