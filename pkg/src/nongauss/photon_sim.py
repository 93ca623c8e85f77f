"""Heralded down-conversion source and two-detector click model.

Exact outcome probabilities are computed first; sampling is a multinomial
draw on top of them, so every estimator can be checked against the exact
ground truth as well as against finite-statistics runs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import binom, poisson

from .errors import InvalidParameterError, TruncationOverflowError
from .estimators import (
    ClickCounts,
    estimate_p0,
    estimate_p1,
    single_photon_lower_bound,
    splitting_ratio,
    vacuum_fraction,
)
from .stats import PhotonStatistics

TAIL_LIMIT = 1e-10
SUM_TOL = 1e-12


def _prob(name, v):
    if not (isinstance(v, (int, float)) and not isinstance(v, bool)) or not 0.0 <= v <= 1.0:
        raise InvalidParameterError(f"{name} must be a probability in [0, 1], got {v!r}", field=name)


@dataclass(frozen=True)
class SourceConfig:
    """Parameters of a simulated heralded source and its detection."""

    pair_gain: float
    trigger_efficiency: float
    signal_efficiency: float
    splitter_t: float = 0.5
    noise_signal_mean: float = 0.0
    noise_trigger_click_prob: float = 0.0
    n_max: int = 12
    trials: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        _prob("pair_gain", self.pair_gain)
        if self.pair_gain >= 1.0:
            raise InvalidParameterError("pair_gain must be < 1", field="pair_gain")
        _prob("trigger_efficiency", self.trigger_efficiency)
        _prob("signal_efficiency", self.signal_efficiency)
        _prob("noise_trigger_click_prob", self.noise_trigger_click_prob)
        if not isinstance(self.splitter_t, (int, float)) or not 0.0 < self.splitter_t < 1.0:
            raise InvalidParameterError("splitter_t must lie in (0, 1)", field="splitter_t")
        if not isinstance(self.noise_signal_mean, (int, float)) or not (
            self.noise_signal_mean >= 0 and math.isfinite(self.noise_signal_mean)
        ):
            raise InvalidParameterError("noise_signal_mean must be finite and >= 0", field="noise_signal_mean")
        for name in ("n_max", "trials", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InvalidParameterError(f"{name} must be a non-negative integer", field=name)
        if self.n_max < 4:
            raise InvalidParameterError("n_max must be >= 4", field="n_max")
        tail = _herald_tail(self)
        if tail >= TAIL_LIMIT:
            raise TruncationOverflowError(
                f"heralded pair-number mass beyond n_max={self.n_max} is {tail:.3g} >= {TAIL_LIMIT}"
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ClickProbabilities:
    p_none: float
    p_a_only: float
    p_b_only: float
    p_coinc: float

    def __post_init__(self):
        v = self.as_array()
        if np.any(v < 0) or abs(v.sum() - 1.0) > SUM_TOL:
            raise InvalidParameterError(f"click probabilities must be >= 0 and sum to 1, got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_none, self.p_a_only, self.p_b_only, self.p_coinc])


def _herald_click(cfg: SourceConfig, n):
    return 1.0 - (1.0 - cfg.noise_trigger_click_prob) * (1.0 - cfg.trigger_efficiency) ** n


def _herald_norm(cfg):
    """Probability that a window produces a trigger click (closed form)."""
    lam2 = cfg.pair_gain**2
    miss = 1.0 - cfg.trigger_efficiency
    return 1.0 - (1.0 - cfg.noise_trigger_click_prob) * (1.0 - lam2) / (1.0 - lam2 * miss)


def _herald_tail(cfg):
    lam2 = cfg.pair_gain**2
    norm = _herald_norm(cfg)
    if norm <= 0:
        return 0.0
    miss = 1.0 - cfg.trigger_efficiency
    m = cfg.n_max + 1
    q = 1.0 - cfg.noise_trigger_click_prob
    tail = lam2**m - q * (1.0 - lam2) * (lam2 * miss) ** m / (1.0 - lam2 * miss)
    return max(tail, 0.0) / norm


def pdc_heralded_stats(config: SourceConfig) -> PhotonStatistics:
    """Signal photon-number distribution conditioned on a trigger click, after signal loss.

    Pair numbers are thermal, ``(1 - g^2) g^(2n)``; the trigger clicks when
    any of the n idler photons is detected or on a spurious noise click.
    """
    norm = _herald_norm(config)
    if norm <= 0:
        raise InvalidParameterError("the trigger never clicks: no heralded windows")
    lam2 = config.pair_gain**2
    n = np.arange(config.n_max + 1)
    joint = (1.0 - lam2) * lam2**n * _herald_click(config, n)
    tail = _herald_tail(config)
    probs = joint / norm
    # absorb the closed-form vs summed normalization difference (< 1e-15)
    probs /= probs.sum() / (1.0 - tail)
    return apply_loss(PhotonStatistics(probs, tail), config.signal_efficiency)


def apply_loss(stats: PhotonStatistics, eta: float) -> PhotonStatistics:
    """Binomial thinning: each photon survives independently with probability ``eta``.

    Tail mass stays in the tail (its distribution is unresolved).
    """
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError(f"eta must lie in [0, 1], got {eta!r}")
    n = np.arange(stats.probs.size)
    kernel = binom.pmf(n[:, None], n[None, :], eta)  # [m, n] = P(m survivors | n photons)
    return PhotonStatistics(kernel @ stats.probs, stats.tail)


def add_poisson_noise(stats: PhotonStatistics, mean: float) -> PhotonStatistics:
    """Photon number of the signal plus independent Poissonian background.

    The result keeps the input support; background mass pushed beyond it
    joins the tail.
    """
    if mean < 0 or not math.isfinite(mean):
        raise InvalidParameterError("noise mean must be finite and >= 0")
    if mean == 0:
        return stats
    noise = poisson.pmf(np.arange(stats.probs.size), mean)
    probs = np.convolve(stats.probs, noise)[: stats.probs.size]
    return PhotonStatistics(probs, max(1.0 - probs.sum(), 0.0))


def click_probabilities_exact(
    stats: PhotonStatistics,
    t: float,
    noise_a: float = 0.0,
    noise_b: float = 0.0,
) -> ClickProbabilities:
    """Per-window outcome probabilities of the split-and-detect scheme.

    With n photons, detector B stays dark with probability ``T^n`` times the
    Poissonian no-click factor of its own background, and symmetrically for
    A.  Tail photons are counted as coincidences.
    """
    if not 0.0 < t < 1.0:
        raise InvalidParameterError("t must lie in (0, 1)")
    if noise_a < 0 or noise_b < 0:
        raise InvalidParameterError("noise means must be >= 0")
    n = np.arange(stats.probs.size)
    p = stats.probs
    qa, qb = math.exp(-noise_a), math.exp(-noise_b)
    p_none = p[0] * qa * qb
    # A only: photons all to A (n >= 1), or vacuum with a background click in A
    p_a = qb * (float((t ** n[1:]) @ p[1:]) - p[0] * math.expm1(-noise_a))
    p_b = qa * (float(((1.0 - t) ** n[1:]) @ p[1:]) - p[0] * math.expm1(-noise_b))
    p_c = 1.0 - p_none - p_a - p_b
    vals = np.maximum([p_none, p_a, p_b, p_c], 0.0)
    vals /= vals.sum()
    return ClickProbabilities(*map(float, vals))


def estimates_from_probabilities(probs: ClickProbabilities, t: float | None = None):
    """Apply the estimators to exact outcome probabilities (the infinite-statistics limit).

    Returns ``(p0, p1_est, t_est)``; ``t=None`` uses ``t_est`` in the p1 estimator.
    """
    t_est = splitting_ratio(probs.p_a_only, probs.p_b_only)
    p0 = vacuum_fraction(probs.p_a_only, probs.p_b_only, probs.p_coinc)
    p1 = single_photon_lower_bound(probs.p_a_only, probs.p_b_only, probs.p_coinc, t_est if t is None else t)
    return p0, p1, t_est


def _partition_sizes(total, partitions):
    base, extra = divmod(total, partitions)
    return [base + (1 if i < extra else 0) for i in range(partitions)]


def sample_counts(
    probs: ClickProbabilities,
    r0: int,
    seed: int,
    partitions: int = 1,
    workers: int = 1,
) -> ClickCounts:
    """Multinomial draw of ``r0`` heralded windows over the four exclusive outcomes.

    The trials are split into ``partitions`` blocks; block i draws from the
    i-th child of ``SeedSequence(seed)``.  Totals depend only on
    (seed, partitions), never on ``workers``.
    """
    if r0 < 0:
        raise InvalidParameterError("r0 must be >= 0")
    if partitions < 1:
        raise InvalidParameterError("partitions must be >= 1")
    pv = probs.as_array()
    children = np.random.SeedSequence(seed).spawn(partitions)
    sizes = _partition_sizes(r0, partitions)

    def draw(i):
        return np.random.default_rng(children[i]).multinomial(sizes[i], pv)

    if workers > 1 and partitions > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            blocks = list(ex.map(draw, range(partitions)))
    else:
        blocks = [draw(i) for i in range(partitions)]
    tot = np.sum(blocks, axis=0)
    return ClickCounts(int(r0), int(tot[1]), int(tot[2]), int(tot[3]))


def true_signal_stats(config: SourceConfig) -> PhotonStatistics:
    """Heralded signal state including the injected background light."""
    return add_poisson_noise(pdc_heralded_stats(config), config.noise_signal_mean)


def exact_click_probabilities(config: SourceConfig) -> ClickProbabilities:
    t = config.splitter_t
    mu = config.noise_signal_mean
    return click_probabilities_exact(pdc_heralded_stats(config), t, mu * t, mu * (1.0 - t))


def run_experiment(config: SourceConfig, partitions: int = 1, workers: int = 1):
    """Sample a counting run; returns ``(counts, ground_truth_stats)``.

    Background photons pass the beam splitter like signal photons, so they
    enter the click model as independent Poissonian arms with means
    ``mu*T`` and ``mu*(1-T)``; the ground truth is the signal convolved
    with that background.
    """
    probs = exact_click_probabilities(config)
    counts = sample_counts(probs, config.trials, config.seed, partitions, workers)
    return counts, true_signal_stats(config)


def bootstrap_sigma(counts: ClickCounts, n_resamples: int = 200, seed: int = 0):
    """Spread of (p0, p1) estimates over multinomial resamples of the observed outcome fractions."""
    if counts.R0 == 0:
        raise InvalidParameterError("cannot resample an empty run")
    frac = np.array([counts.none, counts.R1A, counts.R1B, counts.R2], dtype=float) / counts.R0
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(counts.R0, frac, size=n_resamples)
    p0s = np.empty(n_resamples)
    p1s = np.empty(n_resamples)
    for i, (_, a, b, c) in enumerate(draws):
        cc = ClickCounts(counts.R0, int(a), int(b), int(c))
        p0s[i] = estimate_p0(cc).value
        p1s[i] = estimate_p1(cc).value
    return float(p0s.std(ddof=1)), float(p1s.std(ddof=1))
