"""The double-pass observable R(t) and the complete-positivity test it implements.

Send three probe states through the fiber: the horizontal linear state
(Stokes (1, 0, 0)) once and round-trip through an orthoconjugating
mirror, and the right-circular state (0, 0, 1) once.  The combination

    R(t) = [ r1+(2t) + r2+(2t) r1+(t) / r2+(t) ] / r3R(t)

built purely from measured Stokes components collapses analytically to
exp(-2 (a + alpha - gamma) t).  Complete positivity forces
a + alpha - gamma >= 0, hence R(t) <= 1 at every t; a measured R above
1 certifies that the dynamics cannot be a completely positive
semigroup.

Relaxation-time convention: in the symmetric regime (b = 0, a = alpha)
the longitudinal time is T1 = 1/gamma and the transverse time is
T2 = 1/alpha, where the rates are those of the Stokes components
themselves.  With this convention the CP constraint reads
2 T1 >= T2, a factor of 2 away from the textbook magnetic-resonance
inequality T1 >= T2/2 written for half-rates; comparisons against
other sources must account for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError, SingularConfigurationError
from .generator import DissipativeParams
from .propagator import backward_mueller, mueller_closed_form
from .states import StokesVector

CP_VERDICT_TOL = 1e-10
_DENOM_TOL = 1e-12
_UNDERFLOW_TOL = 1e-300


@dataclass(frozen=True)
class ExperimentResult:
    """One evaluation of the double-pass observable.

    r_value is assembled from Stokes components the way a measurement
    would be; r_closed is the analytic exponential it should equal.
    """

    t: float
    r_value: float
    r_closed: float
    stokes_plus_single: StokesVector
    stokes_plus_double: StokesVector
    stokes_r_single: StokesVector
    cp_verdict: bool


@dataclass(frozen=True)
class RelaxationTimes:
    """Longitudinal and transverse relaxation times (T1 = 1/gamma, T2 = 1/alpha)."""

    t1: float
    t2: float

    @property
    def two_t1_geq_t2(self) -> bool:
        return 2.0 * self.t1 >= self.t2


@dataclass(frozen=True)
class RScanResult:
    """Results of an R(t) scan; singular times are flagged, not fatal."""

    results: tuple[ExperimentResult, ...]
    singular_times: tuple[float, ...]


def r_observable(p: DissipativeParams, omega: float, t: float) -> ExperimentResult:
    """Evaluate R at one time from propagated Stokes components.

    The value is deliberately computed from the simulated measurement
    data, never shortcut through the closed exponential; the exponential
    is carried alongside as the prediction.  Requires t > 0.  Raises
    :class:`SingularConfigurationError` when the linear probe's second
    Stokes component vanishes at t (a zero of sin(2 Omega t)) or the
    circular probe's third component underflows.
    """
    t = float(t)
    if t <= 0.0:
        raise InvalidInputError("R(t) needs a strictly positive time")
    forward = mueller_closed_form(p, omega, t)
    backward = backward_mueller(p, omega, t)
    plus_single = forward.matrix[:, 0]
    plus_double = backward.matrix @ plus_single
    r_single = forward.matrix[:, 2]
    if abs(plus_single[1]) < _DENOM_TOL:
        raise SingularConfigurationError(
            f"second Stokes component of the linear probe vanishes at t = {t}; "
            "pick a time away from the zeros of sin(2 Omega t)"
        )
    if abs(r_single[2]) < _UNDERFLOW_TOL:
        raise SingularConfigurationError(
            f"third Stokes component of the circular probe underflows at t = {t}"
        )
    r_value = (plus_double[0] + plus_double[1] * plus_single[0] / plus_single[1]) / r_single[2]
    r_closed = math.exp(-2.0 * (p.a + p.alpha - p.gamma) * t)
    return ExperimentResult(
        t=t,
        r_value=float(r_value),
        r_closed=r_closed,
        stokes_plus_single=StokesVector.from_array(plus_single),
        stokes_plus_double=StokesVector.from_array(plus_double),
        stokes_r_single=StokesVector.from_array(r_single),
        cp_verdict=bool(r_value <= 1.0 + CP_VERDICT_TOL),
    )


def cp_test(result: ExperimentResult) -> bool:
    """True when the measured R stays below 1 (within 1e-10)."""
    return result.r_value <= 1.0 + CP_VERDICT_TOL


def relaxation_times(p: DissipativeParams) -> RelaxationTimes:
    """T1 and T2 in the symmetric regime b = 0, a = alpha.

    Outside that regime the two transverse components decay at unequal
    rates and a single T2 does not exist, so the call is rejected.
    """
    if abs(p.b) > 1e-12 or abs(p.a - p.alpha) > 1e-12:
        from .errors import UnsupportedConfigurationError

        raise UnsupportedConfigurationError(
            "relaxation times are defined for the symmetric regime b = 0, a = alpha"
        )
    if not (p.alpha > 0.0 and p.gamma > 0.0):
        raise InvalidInputError("relaxation times need alpha > 0 and gamma > 0")
    return RelaxationTimes(t1=1.0 / p.gamma, t2=1.0 / p.alpha)


def r_scan(p: DissipativeParams, omega: float, times) -> RScanResult:
    """Evaluate R over a time grid, flagging singular points instead of failing."""
    results: list[ExperimentResult] = []
    singular: list[float] = []
    for t in times:
        try:
            results.append(r_observable(p, omega, float(t)))
        except SingularConfigurationError:
            singular.append(float(t))
    return RScanResult(results=tuple(results), singular_times=tuple(singular))
