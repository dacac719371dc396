"""Seeded random streams and the primitive draws used by the samplers.

Every sampler takes a :class:`numpy.random.Generator`.  Generators are built
from a ``SeedSequence`` so that independent chains get non-overlapping
streams via :func:`spawn_rngs`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DISCRETE_SUM_TOL = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator for a non-negative integer seed."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child generators for ``count`` parallel chains."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def child_seeds(seed: int, count: int) -> list[int]:
    """Integer sub-seeds derived from ``seed``, one per chain."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


@dataclass(frozen=True)
class BivariateNormalSpec:
    """Bivariate normal on (phi, sigma): means, standard deviations and correlation."""

    mean: tuple[float, float]
    sd: tuple[float, float]
    corr: float

    def __post_init__(self):
        object.__setattr__(self, "mean", (float(self.mean[0]), float(self.mean[1])))
        object.__setattr__(self, "sd", (float(self.sd[0]), float(self.sd[1])))
        object.__setattr__(self, "corr", float(self.corr))
        if not (self.sd[0] > 0 and self.sd[1] > 0):
            raise ValueError(f"standard deviations must be positive, got {self.sd}")
        if not abs(self.corr) < 1:
            raise ValueError(f"correlation must satisfy |rho| < 1, got {self.corr}")

    @property
    def cov(self) -> np.ndarray:
        s1, s2 = self.sd
        r = self.corr
        return np.array([[s1 * s1, r * s1 * s2], [r * s1 * s2, s2 * s2]])

    @property
    def chol(self) -> np.ndarray:
        s1, s2 = self.sd
        r = self.corr
        return np.array([[s1, 0.0], [r * s2, s2 * math.sqrt(1.0 - r * r)]])

    def logpdf(self, a: float, b: float) -> float:
        s1, s2 = self.sd
        r = self.corr
        u = (a - self.mean[0]) / s1
        v = (b - self.mean[1]) / s2
        one_m_r2 = 1.0 - r * r
        quad = (u * u + v * v - 2.0 * r * u * v) / one_m_r2
        return -math.log(2.0 * math.pi * s1 * s2) - 0.5 * math.log(one_m_r2) - 0.5 * quad


def draw_standard_normal(rng: np.random.Generator) -> float:
    return float(rng.standard_normal())


def draw_bivariate_normal(spec: BivariateNormalSpec, rng: np.random.Generator) -> tuple[float, float]:
    z = rng.standard_normal(2)
    a, b = np.asarray(spec.mean) + spec.chol @ z
    return float(a), float(b)


def draw_inverse_gamma(shape: float, scale: float, rng: np.random.Generator) -> float:
    """Draw X with 1/X ~ Gamma(shape, rate=scale)."""
    if not (shape > 0 and scale > 0):
        raise ValueError(f"inverse gamma needs shape > 0 and scale > 0, got ({shape}, {scale})")
    return float(scale / rng.standard_gamma(shape))


def check_probabilities(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError(f"negative weight at index {int(np.argmax(w < 0))}")
    total = w.sum()
    if total == 0:
        raise ValueError("all weights are zero")
    if abs(total - 1.0) > DISCRETE_SUM_TOL:
        raise ValueError(f"weights sum to {total!r}, not 1")
    return w


def draw_discrete(weights, rng: np.random.Generator) -> int:
    """Index ``j`` with probability ``weights[j]`` by inversion of one uniform."""
    w = check_probabilities(weights)
    cw = np.cumsum(w)
    u = rng.random() * cw[-1]
    j = int(np.searchsorted(cw, u, side="right"))
    # guard against u landing exactly on the top edge
    return min(j, w.size - 1)
