"""Bootstrap, conditional and ancestor-sampling particle filters.

The proposal is the state transition (x_0 from the stationary law), so the
incremental weight is the observation density.  Multinomial resampling
happens at every step.  Particle ``N - 1`` carries the reference trajectory
in the conditional filters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import DegenerateFilterError
from .model import LOG_2PI, as_panel
from .stochastics import check_probabilities


def normalize_log_weights(logw) -> np.ndarray:
    """exp(logw - logsumexp(logw)) with max subtraction."""
    lw = np.asarray(logw, dtype=float)
    lw = np.where(np.isnan(lw), -np.inf, lw)
    m = lw.max()
    if not np.isfinite(m):
        raise DegenerateFilterError()
    w = np.exp(lw - m)
    return w / w.sum()


def multinomial_resample(weights, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` iid draws from Discrete(weights)."""
    w = check_probabilities(weights)
    cw = np.cumsum(w)
    u = rng.random(int(count)) * cw[-1]
    idx = np.searchsorted(cw, u, side="right")
    return np.minimum(idx, w.size - 1).astype(np.int64)


@dataclass
class ParticleSystem:
    """Particle values and ancestry, stored compactly.

    values[t, j]      x_t^j
    ancestors[t-1, j] index at t-1 of the parent of particle j at t
    log_weights[t, j] unnormalised log weight at t (zero at t = 0)
    """

    values: np.ndarray
    ancestors: np.ndarray
    log_weights: np.ndarray

    @property
    def N(self) -> int:
        return self.values.shape[1]

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    def normalized_weights(self, t: int) -> np.ndarray:
        return normalize_log_weights(self.log_weights[t])

    def trajectory(self, j: int) -> np.ndarray:
        return _kernels.backtrack(self.values, self.ancestors, int(j))

    def trajectories(self) -> np.ndarray:
        """All N genealogical paths, shape (N, n + 1)."""
        return np.stack([self.trajectory(j) for j in range(self.N)])


def _observation_terms(y, params):
    y = as_panel(y)
    betas = np.asarray(params.betas, dtype=float)
    if y.shape[1] != betas.size:
        raise ValueError(f"returns have {y.shape[1]} columns, params have {betas.size} scales")
    # overflow to inf is reported by the filter as a weight collapse
    with np.errstate(over="ignore"):
        s_obs = np.ascontiguousarray(((y / betas) ** 2).sum(axis=1))
    const = -0.5 * betas.size * LOG_2PI - float(np.log(betas).sum())
    return s_obs, const, betas.size


def _run(y, params, N, ref, mode, rng):
    N = int(N)
    if N < 1:
        raise ValueError(f"need at least one particle, got N={N}")
    if not abs(params.phi) < 1:
        raise ValueError(f"particle filter requires |phi| < 1, got {params.phi}")
    if params.sigma == 0:
        raise ValueError("sigma must be nonzero")
    s_obs, const, p = _observation_terms(y, params)
    n = s_obs.size
    if ref is None:
        ref = np.empty(0)
    else:
        ref = np.ascontiguousarray(ref, dtype=float)
        if ref.shape != (n + 1,):
            raise ValueError(f"reference path must have length {n + 1}, got {ref.shape}")
        if not np.all(np.isfinite(ref)):
            raise ValueError("reference path has non-finite entries")
    # fixed consumption order: state noise, resampling uniforms, ancestor uniforms, final pick
    z = rng.standard_normal((n + 1, N))
    u = rng.random((n, N))
    u_anc = rng.random(n)
    u_fin = rng.random()
    values, anc, logw, loglik, failed = _kernels.run_filter(
        s_obs, const, float(p), float(params.phi), float(params.sigma), float(params.mu),
        ref, mode, z, u, u_anc,
    )
    if failed >= 0:
        raise DegenerateFilterError(failed)
    return ParticleSystem(values, anc, logw), loglik, u_fin


def bootstrap_pf(y, params, N: int, rng: np.random.Generator):
    """Run the bootstrap filter; return ``(ParticleSystem, loglik_estimate)``."""
    system, loglik, _ = _run(y, params, N, None, _kernels.BOOTSTRAP, rng)
    return system, float(loglik)


def sample_trajectory(y, params, N: int, rng: np.random.Generator) -> np.ndarray:
    """One path drawn from the final weights of a bootstrap filter run."""
    system, _, u_fin = _run(y, params, N, None, _kernels.BOOTSTRAP, rng)
    b = _kernels.draw_final(system.log_weights[-1], u_fin)
    return system.trajectory(b)


def conditional_sweep(y, params, N: int, ref, rng: np.random.Generator,
                      ancestor_sampling: bool = True, return_system: bool = False):
    """One conditional filter pass pinned to ``ref``; returns a new path.

    With ``return_system`` the full :class:`ParticleSystem` is returned too.
    """
    if ref is None:
        raise ValueError("conditional filter needs a reference path")
    mode = _kernels.ANCESTOR_SAMPLING if ancestor_sampling else _kernels.CONDITIONAL
    system, _, u_fin = _run(y, params, N, ref, mode, rng)
    b = _kernels.draw_final(system.log_weights[-1], u_fin)
    path = system.trajectory(b)
    if return_system:
        return path, system
    return path


def cpf(y, params, N: int, ref, rng: np.random.Generator) -> np.ndarray:
    return conditional_sweep(y, params, N, ref, rng, ancestor_sampling=False)


def cpf_as(y, params, N: int, ref, rng: np.random.Generator) -> np.ndarray:
    """Conditional filter whose pinned particle redraws its ancestor each step.

    The ancestor weight of particle j at t-1 is w_{t-1}^j p(x'_t | x_{t-1}^j).
    """
    return conditional_sweep(y, params, N, ref, rng, ancestor_sampling=True)

