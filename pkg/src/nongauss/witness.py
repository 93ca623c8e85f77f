"""Vacuum / single-photon witness of quantum non-Gaussianity.

Every mixture of Gaussian states has its (p0, p1) pair inside a convex
region whose upper boundary is traced by pure squeezed coherent states
with the displacement tied to the squeezing by ``d**2 = (e^{4r} - 1) / 4``.
The linear witness ``W(a) = a*p0 + p1`` is bounded over that region by
``W_G(a)``; a measured pair with ``W(a) > W_G(a)`` for some slope ``a``
cannot come from any Gaussian mixture.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import (
    ConsistencyError,
    InvalidParameterError,
    NoRootError,
    OutOfRangeError,
)
from .stats import TAIL_NEGLIGIBLE, PhotonStatistics

PAIR_SLACK = 1e-12
R_TOL = 1e-12
R_MAX = 10.0
SCAN_AGREEMENT = 1e-9

# boundary point with the largest single-photon probability (tangent slope 0)
R_AT_P1_MAX = math.log(3.0) / 2.0
P0_AT_P1_MAX = math.sqrt(3.0) / (2.0 * math.e)
P1_MAX = 3.0 * math.sqrt(3.0) / (4.0 * math.e)


def _finite_nonneg(name, value):
    if not math.isfinite(value) or value < 0:
        raise InvalidParameterError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class GaussianPureParams:
    """Squeezing ``r`` and real displacement ``d`` of a pure single-mode Gaussian state."""

    r: float
    d: float

    def __post_init__(self):
        _finite_nonneg("r", self.r)
        _finite_nonneg("d", self.d)


@dataclass(frozen=True)
class ProbabilityPair:
    p0: float
    p1: float
    sigma_p0: float | None = None
    sigma_p1: float | None = None

    def __post_init__(self):
        for name in ("p0", "p1"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0 or v > 1:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {v!r}")
        if self.p0 + self.p1 > 1 + PAIR_SLACK:
            raise InvalidParameterError(f"p0 + p1 = {self.p0 + self.p1!r} exceeds 1")
        for name in ("sigma_p0", "sigma_p1"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v < 0):
                raise InvalidParameterError(f"{name} must be finite and >= 0")


@dataclass(frozen=True)
class WitnessReport:
    a_opt: float
    w_value: float
    w_bound: float
    delta_w: float
    sigma_delta_w: float
    non_gaussian: bool
    # True when p0 lies left of the p1-maximizing boundary point and the
    # optimum is the a -> 0+ limit rather than an interior tangent.
    clamped: bool = False


def gaussian_p01(params: GaussianPureParams) -> ProbabilityPair:
    """Vacuum and single-photon probabilities of a pure squeezed coherent state."""
    r, d2 = params.r, params.d * params.d
    # 1 - tanh(r) == 2 / (e^{2r} + 1), which stays accurate for large r
    p0 = math.exp(-2.0 * d2 / (math.exp(2.0 * r) + 1.0)) / math.cosh(r)
    p1 = d2 * p0 / math.cosh(r) ** 2
    return ProbabilityPair(p0, p1)


def _boundary(r):
    e2 = math.expm1(2.0 * r)
    c = math.cosh(r)
    p0 = math.exp(-0.5 * e2) / c
    return p0, 0.25 * math.expm1(4.0 * r) * p0 / (c * c)


def _boundary_array(r):
    c = np.cosh(r)
    p0 = np.exp(-0.5 * np.expm1(2.0 * r)) / c
    return p0, 0.25 * np.expm1(4.0 * r) * p0 / (c * c)


def boundary_point(r: float) -> ProbabilityPair:
    """Point of the Gaussian-mixture boundary reached at squeezing ``r``."""
    _finite_nonneg("r", r)
    return ProbabilityPair(*_boundary(r))


def tangent_slope(r: float) -> float:
    """Witness slope whose bounding line touches the boundary at squeezing ``r``."""
    if not math.isfinite(r) or r < 0 or r > R_AT_P1_MAX:
        raise OutOfRangeError(f"r must lie in [0, ln(3)/2], got {r!r}")
    x = math.exp(2.0 * r)
    return min(max(x * (3.0 - x) / (1.0 + x), 0.0), 1.0)


def _tangent_r(a):
    # root x >= 1 of x^2 + (a - 3) x + a = 0, with x = e^{2r}
    x = 0.5 * ((3.0 - a) + np.sqrt((a - 1.0) * (a - 9.0)))
    return 0.5 * np.log(x)


def wg_bound(a: float) -> float:
    """Largest value of ``a*p0 + p1`` over all mixtures of Gaussian states."""
    if not math.isfinite(a) or a <= 0 or a > 1:
        raise OutOfRangeError(f"slope a must lie in (0, 1], got {a!r}")
    p0, p1 = _boundary(float(_tangent_r(a)))
    return a * p0 + p1


def _wg_bound_array(a):
    p0, p1 = _boundary_array(_tangent_r(a))
    return a * p0 + p1


def witness_value(a: float, pair: ProbabilityPair) -> float:
    return a * pair.p0 + pair.p1


def solve_r_for_p0(p0: float, r_max: float = R_MAX) -> float:
    """Squeezing at which the boundary's vacuum probability equals ``p0``.

    The boundary p0 is strictly decreasing in r, so plain bisection on
    [0, r_max] converges unconditionally.
    """
    p0_min = _boundary(r_max)[0]
    if not math.isfinite(p0) or p0 > 1 or p0 <= p0_min:
        raise NoRootError(f"p0={p0!r} is not reachable on the boundary for r in [0, {r_max}]")
    if p0 == 1.0:
        return 0.0
    return bisect(lambda r: _boundary(r)[0] - p0, 0.0, r_max, xtol=R_TOL)


def scan_delta_w(pair: ProbabilityPair, samples: int = 2001) -> tuple[float, float]:
    """Maximize ``a*p0 + p1 - W_G(a)`` by a grid over a in (0, 1] plus golden-section refinement.

    Independent of the envelope route in :func:`max_delta_w`; used to
    cross-check it.  Returns ``(a_best, delta_w_best)``.
    """
    p0, p1 = pair.p0, pair.p1
    grid = np.linspace(0.0, 1.0, samples)
    grid[0] = 1e-12
    vals = grid * p0 + p1 - _wg_bound_array(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, samples - 1)]

    def f(a):
        return a * p0 + p1 - float(_wg_bound_array(a))

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > 1e-13:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    cands = [(vals[i], grid[i]), (fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best, a_best = max(cands)
    return float(a_best), float(best)


def max_delta_w(
    pair: ProbabilityPair,
    cov: float = 0.0,
    sigma_k: float = 3.0,
    verify: bool = False,
) -> WitnessReport:
    """Largest witness violation over the slope a, located by the envelope condition.

    At the optimum the tangent point's vacuum probability equals the measured
    ``p0``, so the violation is the vertical gap ``p1 - p1_boundary(p0)``.
    For ``p0`` left of the p1-maximizing boundary point the supremum over
    (0, 1] sits at a -> 0+ and the report is flagged ``clamped``.

    ``cov`` is the p0/p1 covariance; the uncertainty is propagated at fixed
    ``a_opt``.  With ``verify=True`` the result is checked against
    :func:`scan_delta_w` and :class:`ConsistencyError` raised on disagreement.
    """
    if sigma_k < 0:
        raise InvalidParameterError("sigma_k must be >= 0")
    p0, p1 = pair.p0, pair.p1
    if p0 <= P0_AT_P1_MAX:
        a = 0.0
        w_value = p1
        w_bound = P1_MAX
        clamped = True
    else:
        r = min(solve_r_for_p0(p0), R_AT_P1_MAX)
        a = tangent_slope(r)
        q0, q1 = _boundary(r)
        w_value = a * p0 + p1
        w_bound = a * q0 + q1
        clamped = False
    delta = w_value - w_bound

    s0 = pair.sigma_p0 or 0.0
    s1 = pair.sigma_p1 or 0.0
    var = (a * s0) ** 2 + s1**2 + 2.0 * a * cov
    sigma = math.sqrt(max(var, 0.0))

    if verify:
        _, scanned = scan_delta_w(pair)
        if abs(scanned - delta) > SCAN_AGREEMENT:
            raise ConsistencyError(
                f"envelope delta_w={delta!r} disagrees with scan {scanned!r} for {pair}"
            )
    return WitnessReport(
        a_opt=a,
        w_value=w_value,
        w_bound=w_bound,
        delta_w=delta,
        sigma_delta_w=sigma,
        non_gaussian=bool(delta > sigma_k * sigma and delta > 0),
        clamped=clamped,
    )


def in_gaussian_region(pair: ProbabilityPair) -> bool:
    return max_delta_w(pair).delta_w <= 0.0


def multimode_p01(modes: Sequence[GaussianPureParams]) -> ProbabilityPair:
    """Total-photon-number p0 and p1 of a product of pure single-mode Gaussian states."""
    if len(modes) == 0:
        raise InvalidParameterError("need at least one mode")
    singles = [gaussian_p01(m) for m in modes]
    vac = [s.p0 for s in singles]
    n = len(vac)
    # prefix/suffix products avoid dividing by an underflowed p0
    prefix = [1.0] * (n + 1)
    for i, v in enumerate(vac):
        prefix[i + 1] = prefix[i] * v
    suffix = [1.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * vac[i]
    p1 = sum(s.p1 * prefix[i] * suffix[i + 1] for i, s in enumerate(singles))
    return ProbabilityPair(prefix[n], p1)


def wigner_origin_bound(p0: float) -> float:
    """Lower bound on the Wigner function at the origin implied by ``p0`` alone."""
    if not math.isfinite(p0) or p0 < 0 or p0 > 1:
        raise OutOfRangeError(f"p0 must lie in [0, 1], got {p0!r}")
    return (2.0 * p0 - 1.0) / math.pi


def wigner_origin(stats: PhotonStatistics) -> float:
    """Wigner function at phase-space origin, ``<(-1)^n> / pi``."""
    if stats.tail > TAIL_NEGLIGIBLE:
        raise InvalidParameterError("parity of the unresolved tail is unknown; tail must be ~0")
    signs = np.where(np.arange(stats.probs.size) % 2 == 0, 1.0, -1.0)
    return float(signs @ stats.probs) / math.pi
