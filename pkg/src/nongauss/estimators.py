"""Click-count estimators for a trigger-conditioned beam-splitter / two-APD measurement.

Counts are classified exclusively per heralding window: ``R1A`` and ``R1B``
hold windows where only that detector clicked, ``R2`` windows where both
clicked.  Uncertainties model the four exclusive classes (no click, A only,
B only, both) as independent Poisson counts and propagate to first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateError,
    EmptyRunError,
    InvalidParameterError,
    NoClicksError,
    OutOfRangeError,
    SingularSplittingError,
    ZeroMeanError,
)
from .stats import TAIL_NEGLIGIBLE, PhotonStatistics
from .witness import ProbabilityPair

SINGULAR_T = 1.0 - 1e-9


@dataclass(frozen=True)
class ClickCounts:
    R0: int
    R1A: int
    R1B: int
    R2: int
    duration_s: float | None = None

    def __post_init__(self):
        for name in ("R0", "R1A", "R1B", "R2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise InvalidParameterError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.R1A + self.R1B + self.R2 > self.R0:
            raise InvalidParameterError(
                f"R1A + R1B + R2 = {self.R1A + self.R1B + self.R2} exceeds R0 = {self.R0}"
            )
        if self.duration_s is not None and not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise InvalidParameterError("duration_s must be positive when given")

    @classmethod
    def from_inclusive(cls, R0, R1A, R1B, R2, duration_s=None) -> ClickCounts:
        """Build from two-fold totals that also include the three-fold events."""
        if R2 > min(R1A, R1B):
            raise InvalidParameterError("inclusive two-fold counts must each be >= R2")
        return cls(R0, R1A - R2, R1B - R2, R2, duration_s)

    @property
    def none(self) -> int:
        return self.R0 - self.R1A - self.R1B - self.R2

    def _poisson_var(self):
        return np.array([self.none, self.R1A, self.R1B, self.R2], dtype=float)


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    sigma: float
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InvalidParameterError("sigma must be >= 0")


def splitting_coefficient(t: float) -> float:
    """Weight ``(T^2 + (1-T)^2) / (2T(1-T))`` of the coincidence correction."""
    return (t * t + (1.0 - t) ** 2) / (2.0 * t * (1.0 - t))


def vacuum_fraction(ra: float, rb: float, rc: float) -> float:
    """p0 from per-window rates of A-only, B-only and coincidence outcomes."""
    return 1.0 - (ra + rb + rc)


def splitting_ratio(ra: float, rb: float) -> float:
    """Splitting ratio from single-detector rates, relabeled to be >= 1/2."""
    return max(ra, rb) / (ra + rb)


def single_photon_lower_bound(ra: float, rb: float, rc: float, t: float) -> float:
    """p1 estimate from per-window rates; never exceeds the true p1 when ``t`` is not underestimated."""
    return ra + rb - splitting_coefficient(t) * rc


def _splitting_coefficient_deriv(t):
    return -(1.0 - 2.0 * t) / (2.0 * t * t * (1.0 - t) ** 2)


def _require_triggers(counts):
    if counts.R0 == 0:
        raise EmptyRunError("no heralding events (R0 = 0)")


def _propagate(counts, *jacobians):
    var = counts._poisson_var()
    J = np.vstack(jacobians)
    return (J * var) @ J.T


def _p0_jacobian(counts):
    R0 = counts.R0
    p0 = counts.none / R0
    return np.array([1.0 - p0, -p0, -p0, -p0]) / R0


def estimate_p0(counts: ClickCounts) -> EstimateWithError:
    """Vacuum probability: fraction of heralded windows with no signal click."""
    _require_triggers(counts)
    R0 = counts.R0
    p0 = vacuum_fraction(counts.R1A / R0, counts.R1B / R0, counts.R2 / R0)
    cov = _propagate(counts, _p0_jacobian(counts))
    return EstimateWithError(p0, math.sqrt(cov[0, 0]))


def estimate_splitting(counts: ClickCounts) -> EstimateWithError:
    """Effective splitting ratio from single-detector clicks.

    Channels are relabeled so the value is >= 1/2; the swap is reported
    through the ``channels_swapped`` flag.
    """
    a, b = counts.R1A, counts.R1B
    s = a + b
    if s == 0:
        raise NoClicksError("no single-detector clicks (R1A + R1B = 0)")
    flags = ()
    if a < b:
        a, b = b, a
        flags = ("channels_swapped",)
    return EstimateWithError(splitting_ratio(a, b), math.sqrt(a * b / s**3), flags)


def _p1_parts(counts, t):
    """Value and Jacobian over (none, A, B, C) of the single-photon estimator.

    ``t=None`` derives the splitting ratio from the same counts and includes
    its dependence in the Jacobian.
    """
    R0, A, B, C = counts.R0, counts.R1A, counts.R1B, counts.R2
    S = A + B
    if C == 0:
        k, dk_dA, dk_dB = 0.0, 0.0, 0.0
        t_used = None
    elif t is None:
        if S == 0:
            raise NoClicksError("coincidences without single clicks leave the splitting undefined")
        t_raw = A / S
        t_used = max(t_raw, 1.0 - t_raw)
        if t_used >= SINGULAR_T:
            raise SingularSplittingError(f"estimated splitting {t_used!r} is singular")
        k = splitting_coefficient(t_raw)
        dk = _splitting_coefficient_deriv(t_raw)
        dk_dA, dk_dB = dk * B / S**2, -dk * A / S**2
    else:
        t_used = t
        k, dk_dA, dk_dB = splitting_coefficient(t), 0.0, 0.0
    p1 = single_photon_lower_bound(A / R0, B / R0, C / R0, t_used) if C else S / R0
    jac = np.array([
        -p1,
        1.0 - C * dk_dA - p1,
        1.0 - C * dk_dB - p1,
        -(k + p1),
    ]) / R0
    return p1, jac, t_used


def _check_t(t):
    if t is None:
        return
    if not math.isfinite(t) or t < 0.5:
        raise OutOfRangeError(f"splitting ratio must be >= 1/2 after relabeling, got {t!r}")
    if t >= SINGULAR_T:
        raise SingularSplittingError(f"splitting ratio {t!r} is singular")


def estimate_p1(counts: ClickCounts, t: float | None = None) -> EstimateWithError:
    """Lower-bound estimate of the single-photon probability.

    Subtracts the coincidence rate weighted by the splitting coefficient
    from the single-click rate; the two-photon term cancels and the
    remaining bias is non-negative.  ``t=None`` uses the splitting ratio
    estimated from the counts and propagates its uncertainty.  Negative
    values are returned as-is with the ``negative_p1`` flag.
    """
    _require_triggers(counts)
    _check_t(t)
    p1, jac, _ = _p1_parts(counts, t)
    sigma = math.sqrt(_propagate(counts, jac)[0, 0])
    flags = ("negative_p1",) if p1 < 0 else ()
    return EstimateWithError(p1, sigma, flags)


def p01_covariance(counts: ClickCounts, t: float | None = None) -> np.ndarray:
    """2x2 covariance of (p0, p1) from the shared counts."""
    _require_triggers(counts)
    _check_t(t)
    _, jac, _ = _p1_parts(counts, t)
    return _propagate(counts, _p0_jacobian(counts), jac)


def estimate_pair(counts: ClickCounts, t: float | None = None):
    """Return ``(pair, cov_p0_p1, p1_estimate)`` ready for the witness.

    A negative p1 estimate is floored at 0 in the pair only (the witness
    domain); the raw value is kept in the returned estimate.
    """
    p0 = estimate_p0(counts)
    p1 = estimate_p1(counts, t)
    cov = p01_covariance(counts, t)
    pair = ProbabilityPair(
        min(max(p0.value, 0.0), 1.0),
        min(max(p1.value, 0.0), 1.0 - p0.value),
        sigma_p0=p0.sigma,
        sigma_p1=p1.sigma,
    )
    return pair, float(cov[0, 1]), p1


def p1_bias_bound(stats: PhotonStatistics, t: float) -> float:
    """Exact gap ``p1 - p1_est`` for click probabilities generated by ``stats``.

    Only n >= 3 terms contribute.  Mass in the unresolved tail is charged
    the n -> infinity weight, which matches treating tail photons as
    always producing a coincidence.
    """
    if not math.isfinite(t) or t < 0.5:
        raise OutOfRangeError(f"t must lie in [1/2, 1), got {t!r}")
    if t >= SINGULAR_T:
        raise SingularSplittingError(f"splitting ratio {t!r} is singular")
    u = 1.0 - t
    n = np.arange(3, stats.probs.size)
    weights = (t * t - t**n + u * u - u**n) / (2.0 * t * u)
    return float(weights @ stats.probs[3:]) + splitting_coefficient(t) * stats.tail


def g2_of_rhoT(p0: float, p1: float) -> float:
    """Zero-delay g2 of the state diagonal on {0, 1, 2} photons."""
    ProbabilityPair(p0, p1)
    p2 = max(1.0 - p0 - p1, 0.0)
    nbar = 2.0 * (1.0 - p0) - p1
    if nbar <= 0:
        raise DegenerateError("mean photon number is zero; g2 undefined")
    return 2.0 * p2 / nbar**2


def g2_of_stats(stats: PhotonStatistics) -> float:
    if stats.tail > TAIL_NEGLIGIBLE:
        raise InvalidParameterError("exact moments need finite support (tail ~ 0)")
    n = np.arange(stats.probs.size)
    nbar = float(n @ stats.probs)
    if nbar <= 0:
        raise ZeroMeanError("mean photon number is zero; g2 undefined")
    return float((n * (n - 1)) @ stats.probs) / nbar**2


def alpha_anticorrelation(counts: ClickCounts) -> EstimateWithError:
    """Anticorrelation parameter ``R0*R2 / (R1A*R1B)``; classical light gives >= 1."""
    R0, A, B, C = counts.R0, counts.R1A, counts.R1B, counts.R2
    if A == 0 or B == 0:
        raise NoClicksError("alpha needs clicks on both detectors")
    alpha = R0 * C / (A * B)
    jac = np.array([alpha / R0, alpha / R0 - alpha / A, alpha / R0 - alpha / B, alpha / R0 + R0 / (A * B)])
    return EstimateWithError(alpha, math.sqrt(_propagate(counts, jac)[0, 0]))


def rho_T_from_pair(pair: ProbabilityPair) -> PhotonStatistics:
    p2 = max(1.0 - pair.p0 - pair.p1, 0.0)
    return PhotonStatistics(np.array([pair.p0, pair.p1, p2]))
