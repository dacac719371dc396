"""Synthetic SV / MSV data with the latent path recorded alongside the returns."""

from __future__ import annotations

import math

import numpy as np

from .model import MsvParams, SvParams


def _simulate(phi, sigma, mu, betas, n, rng):
    if not abs(phi) < 1:
        raise ValueError(f"simulation requires |phi| < 1, got {phi}")
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    # draw order is fixed: x0, state noise, observation noise
    z0 = rng.standard_normal()
    w = rng.standard_normal(n)
    eps = rng.standard_normal((n, betas.size))
    x = np.empty(n + 1)
    x[0] = mu + abs(sigma) / math.sqrt(1.0 - phi * phi) * z0
    for t in range(1, n + 1):
        x[t] = mu + phi * (x[t - 1] - mu) + sigma * w[t - 1]
    y = betas[None, :] * np.exp(0.5 * x[1:, None]) * eps
    return x, y


def simulate_sv(params: SvParams, n: int, rng: np.random.Generator):
    """Return ``(x, y)`` with ``x`` of length n + 1 and ``y`` of shape (n, 1)."""
    return _simulate(params.phi, params.sigma, params.mu, params.betas, n, rng)


def simulate_msv(params: MsvParams, n: int, rng: np.random.Generator):
    """Return ``(x, y)`` with a shared path ``x`` and returns ``y`` of shape (n, p)."""
    return _simulate(params.phi, params.sigma, 0.0, params.betas, n, rng)
