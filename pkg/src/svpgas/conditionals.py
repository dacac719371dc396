"""Parameter updates given a latent path.

Closed-form conjugate draws for the individual-sampling baseline, the level
mu and the MSV scales, plus the adaptive random-walk Metropolis step that
updates (phi, sigma) jointly.  Each sampler has a ``*_posterior`` companion
returning the parameters of the distribution it draws from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import PriorSpec, joint_theta_logdensity
from .stochastics import draw_inverse_gamma

MAX_TRUNCATION_TRIES = 10_000


def _path(path) -> np.ndarray:
    x = np.asarray(path, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("latent path needs at least two entries (n >= 1)")
    return x


def sigma2_posterior(phi: float, path, a0: float, b0: float) -> tuple[float, float]:
    """IG(shape, scale) for sigma^2 given phi and a zero-level path."""
    x = _path(path)
    n = x.size - 1
    r = x[1:] - phi * x[:-1]
    return 0.5 * (a0 + n + 1), 0.5 * (b0 + float(r @ r))


def sample_sigma2_ig(phi: float, path, prior: tuple[float, float], rng) -> float:
    shape, scale = sigma2_posterior(phi, path, *prior)
    return draw_inverse_gamma(shape, scale, rng)


def phi_posterior(sigma: float, path, mu_phi: float, var_phi: float) -> tuple[float, float]:
    """(mean, variance) = (Bb, B) of the normal conditional of phi."""
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    x = _path(path)
    s2 = sigma * sigma
    b_inv = 1.0 / var_phi + float(x[:-1] @ x[:-1]) / s2
    b = mu_phi / var_phi + float(x[1:] @ x[:-1]) / s2
    var = 1.0 / b_inv
    return var * b, var


def sample_phi_normal(sigma: float, path, prior: tuple[float, float], rng,
                      stationary: bool = False) -> float:
    """Draw phi from N(Bb, B).

    With ``stationary`` the draw is restricted to |phi| < 1 by rejection,
    which the particle filter needs for its initial law.
    """
    mean, var = phi_posterior(sigma, path, *prior)
    sd = math.sqrt(var)
    for _ in range(MAX_TRUNCATION_TRIES):
        phi = mean + sd * rng.standard_normal()
        if not stationary or abs(phi) < 1:
            return float(phi)
    raise FloatingPointError(
        f"phi conditional N({mean:.4g}, {var:.4g}) puts almost no mass on |phi| < 1"
    )


def mu_posterior(theta, path) -> tuple[float, float]:
    """(mean, variance) of the flat-prior conditional of the level mu."""
    phi, sigma = float(theta[0]), float(theta[1])
    if not abs(phi) < 1:
        raise ValueError(f"mu update requires |phi| < 1, got {phi}")
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    x = _path(path)
    n = x.size - 1
    s2 = sigma * sigma
    var = s2 / (n * (1.0 - phi) ** 2 + (1.0 - phi * phi))
    resid_sum = float(np.sum(x[1:] - phi * x[:-1]))
    mean = var * ((1.0 - phi * phi) * x[0] / s2 + (1.0 - phi) * resid_sum / s2)
    return mean, var


def sample_mu(theta, path, rng) -> float:
    mean, var = mu_posterior(theta, path)
    return float(mean + math.sqrt(var) * rng.standard_normal())


def beta2_posterior(y_col, path, a: float, b: float) -> tuple[float, float]:
    """IG(shape, scale) for one asset's squared scale."""
    x = _path(path)
    y = np.asarray(y_col, dtype=float).ravel()
    n = x.size - 1
    if y.size != n:
        raise ValueError(f"asset has {y.size} returns but the path implies n={n}")
    return 0.5 * (a + n + 1), 0.5 * (b + float(np.sum(y * y * np.exp(-x[1:]))))


def sample_beta2(y_col, path, prior: tuple[float, float], rng) -> float:
    shape, scale = beta2_posterior(y_col, path, *prior)
    return draw_inverse_gamma(shape, scale, rng)


@dataclass(frozen=True)
class AdapterState:
    """Proposal N2(theta, lam * cov) and the stochastic-approximation state.

    Step lengths are gamma_j = gamma_scale * j ** -gamma_exponent.
    """

    lam: float
    mean: np.ndarray
    cov: np.ndarray
    step_index: int = 0
    alpha_star: float = 0.234
    gamma_exponent: float = 0.6
    # gamma_1 < 1 so a rejected first proposal cannot zero the covariance
    gamma_scale: float = 0.5

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not np.allclose(cov, cov.T):
            raise ValueError("proposal covariance must be symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-12 * max(1.0, np.abs(cov).max()):
            raise ValueError("proposal covariance must be positive semidefinite")
        if not 0.5 < self.gamma_exponent <= 1:
            raise ValueError(f"gamma exponent must lie in (0.5, 1], got {self.gamma_exponent}")
        if not 0 < self.gamma_scale <= 1:
            raise ValueError(f"gamma scale must lie in (0, 1], got {self.gamma_scale}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def initial(cls, theta0, lam: float = 2.38 ** 2 / 2, cov=None, **kwargs) -> AdapterState:
        if cov is None:
            cov = np.diag([0.01, 0.01])
        return cls(lam=lam, mean=np.asarray(theta0, dtype=float), cov=cov, **kwargs)

    def gamma(self, j: int) -> float:
        return self.gamma_scale * float(j) ** (-self.gamma_exponent)

    def proposal_factor(self) -> np.ndarray:
        """Square root of lam * cov (eigen-based, tolerates singular cov)."""
        w, v = np.linalg.eigh(self.lam * self.cov)
        return v * np.sqrt(np.clip(w, 0.0, None))

    def updated(self, theta_new, alpha: float, gamma: float | None = None) -> AdapterState:
        j = self.step_index + 1
        g = self.gamma(j) if gamma is None else float(gamma)
        theta_new = np.asarray(theta_new, dtype=float)
        d = theta_new - self.mean
        lam = math.exp(math.log(self.lam) + g * (alpha - self.alpha_star))
        cov = (1.0 - g) * self.cov + g * np.outer(d, d)
        cov = 0.5 * (cov + cov.T)
        return replace(self, lam=lam, mean=self.mean + g * d, cov=cov, step_index=j)


def rwm_joint_step(theta, mu: float, path, prior: PriorSpec, adapter: AdapterState,
                   adapt: bool, rng: np.random.Generator):
    """One random-walk Metropolis update of (phi, sigma).

    Returns ``(theta_new, accepted, adapter_new)``.  Proposals with
    |phi| >= 1 have zero density and are rejected.
    """
    theta = np.asarray(theta, dtype=float)
    log_g = joint_theta_logdensity(theta, mu, path, prior)
    if not np.isfinite(log_g):
        raise FloatingPointError(f"log posterior is not finite at current theta={theta}")
    proposal = theta + adapter.proposal_factor() @ rng.standard_normal(2)
    u = rng.random()
    if proposal[1] == 0:
        log_ratio = -math.inf
    else:
        log_ratio = joint_theta_logdensity(proposal, mu, path, prior) - log_g
    alpha = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
    accepted = bool(log_ratio >= 0 or u < alpha)
    theta_new = proposal if accepted else theta
    if adapt:
        adapter = adapter.updated(theta_new, alpha)
    return theta_new, accepted, adapter
