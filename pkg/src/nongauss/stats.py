"""Finite photon-number distributions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NotNormalizedError

NORM_TOL = 1e-9
# tail mass small enough to be treated as zero by exact-moment routines
TAIL_NEGLIGIBLE = 1e-12


@dataclass(frozen=True)
class PhotonStatistics:
    """Photon-number probabilities ``p_0..p_N`` plus the mass ``tail`` beyond ``N``.

    Construction validates non-negativity and normalization, so every
    instance in circulation is a proper distribution.
    """

    probs: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).copy()
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidParameterError("probs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(probs)) or not np.isfinite(self.tail):
            raise InvalidParameterError("probabilities must be finite")
        if np.any(probs < 0) or self.tail < 0:
            raise InvalidParameterError("probabilities must be non-negative")
        total = probs.sum() + self.tail
        if abs(total - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"sum of probabilities plus tail is {total!r}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail", float(self.tail))

    @classmethod
    def fock(cls, n: int) -> PhotonStatistics:
        probs = np.zeros(n + 1)
        probs[n] = 1.0
        return cls(probs)

    @classmethod
    def vacuum(cls) -> PhotonStatistics:
        return cls.fock(0)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def p0(self) -> float:
        return float(self.probs[0])

    @property
    def p1(self) -> float:
        return float(self.probs[1]) if self.probs.size > 1 else 0.0

    def mean(self) -> float:
        """Mean photon number of the resolved part (exact when ``tail == 0``)."""
        return float(np.arange(self.probs.size) @ self.probs)

    def padded(self, size: int) -> np.ndarray:
        out = np.zeros(max(size, self.probs.size))
        out[: self.probs.size] = self.probs
        return out
