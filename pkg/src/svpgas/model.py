"""Parameter containers and log-densities of the SV and MSV state-space models.

State:        x_t = mu + phi (x_{t-1} - mu) + sigma w_t,  x_0 ~ N(mu, sigma^2 / (1 - phi^2))
Observation:  y_it = beta_i exp(x_t / 2) eps_it,          i = 1..p

Only sigma^2 enters any density, so a negative sigma is a legal value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stochastics import BivariateNormalSpec

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SvParams:
    """Univariate SV parameters.

    ``beta`` is the observation scale.  With a free level ``mu`` the scale is
    kept at 1 and the equivalent zero-level scale is ``exp(mu / 2)``, see
    :attr:`implied_beta`.
    """

    phi: float
    sigma: float
    mu: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def betas(self) -> np.ndarray:
        return np.array([float(self.beta)])

    @property
    def p(self) -> int:
        return 1

    @property
    def implied_beta(self) -> float:
        """Observation scale after recentring the state at zero: beta * exp(mu / 2)."""
        return float(self.beta * math.exp(self.mu / 2.0))


@dataclass(frozen=True)
class MsvParams:
    """Multivariate SV: one zero-level volatility path driving ``p`` assets."""

    phi: float
    sigma: float
    betas: np.ndarray = field(default_factory=lambda: np.ones(1))

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if b.ndim != 1 or b.size < 1:
            raise ValueError("betas must be a non-empty vector")
        if np.any(~(b > 0)):
            raise ValueError(f"betas must be positive, got {b}")
        object.__setattr__(self, "betas", b)

    @property
    def mu(self) -> float:
        return 0.0

    @property
    def p(self) -> int:
        return int(self.betas.size)


def default_theta_prior() -> BivariateNormalSpec:
    return BivariateNormalSpec(mean=(0.95, 0.2), sd=(0.1, 0.2), corr=-0.5)


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters for every parameter update.

    theta_prior:  bivariate normal on (phi, sigma) used by the joint update.
    ig_state:     (a0, b0) with sigma^2 ~ IG(a0/2, b0/2), individual sampling only.
    ig_beta:      (a_i, b_i) pairs with beta_i^2 ~ IG(a_i/2, b_i/2); a single pair
                  is shared by all assets.
    The level mu always has a flat prior.
    """

    theta_prior: BivariateNormalSpec = field(default_factory=default_theta_prior)
    ig_state: tuple[float, float] = (5.0, 0.2)
    ig_beta: tuple[tuple[float, float], ...] = ((2.0, 2.0),)

    def __post_init__(self):
        a0, b0 = self.ig_state
        bad = [] if (a0 > 0 and b0 > 0) else [f"ig_state=({a0}, {b0})"]
        pairs = tuple((float(a), float(b)) for a, b in self.ig_beta)
        bad += [f"ig_beta[{i}]=({a}, {b})" for i, (a, b) in enumerate(pairs) if not (a > 0 and b > 0)]
        if not pairs:
            bad.append("ig_beta is empty")
        if bad:
            raise ValueError("inverse-gamma hyperparameters must be positive: " + ", ".join(bad))
        object.__setattr__(self, "ig_state", (float(a0), float(b0)))
        object.__setattr__(self, "ig_beta", pairs)

    @property
    def phi_normal(self) -> tuple[float, float]:
        """(mean, variance) of the marginal normal prior on phi."""
        return self.theta_prior.mean[0], self.theta_prior.sd[0] ** 2

    def ig_beta_for(self, p: int) -> list[tuple[float, float]]:
        if len(self.ig_beta) == 1:
            return [self.ig_beta[0]] * p
        if len(self.ig_beta) != p:
            raise ValueError(f"ig_beta has {len(self.ig_beta)} pairs for {p} assets")
        return list(self.ig_beta)


def as_panel(y) -> np.ndarray:
    """Coerce returns to an n x p float array (1-D input becomes one column)."""
    a = np.asarray(y, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"returns must be n x p with n >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("returns contain non-finite values")
    return a


def _check_sigma(sigma):
    if sigma == 0:
        raise ValueError("sigma must be nonzero")


def stationary_variance(phi: float, sigma: float) -> float:
    if not abs(phi) < 1:
        raise ValueError(f"stationary variance requires |phi| < 1, got {phi}")
    return sigma * sigma / (1.0 - phi * phi)


def transition_logpdf(x_prev, x_curr, params):
    _check_sigma(params.sigma)
    s2 = params.sigma ** 2
    mean = params.mu + params.phi * (np.asarray(x_prev, dtype=float) - params.mu)
    r = np.asarray(x_curr, dtype=float) - mean
    return -0.5 * (LOG_2PI + math.log(s2)) - 0.5 * r * r / s2


def initial_logpdf(x0, params):
    _check_sigma(params.sigma)
    v = stationary_variance(params.phi, params.sigma)
    r = np.asarray(x0, dtype=float) - params.mu
    return -0.5 * (LOG_2PI + math.log(v)) - 0.5 * r * r / v


def observation_logpdf(y_row, x_t: float, params) -> float:
    """Sum over assets of log N(y_i; 0, beta_i^2 exp(x_t))."""
    y = np.atleast_1d(np.asarray(y_row, dtype=float))
    betas = params.betas
    if y.shape != betas.shape:
        raise ValueError(f"observation has {y.size} components, params have {betas.size}")
    var = betas ** 2 * math.exp(x_t)
    return float(np.sum(-0.5 * (LOG_2PI + np.log(var)) - 0.5 * y * y / var))


def theoretical_sv_acf(phi: float, sigma: float, kappa_eps: float = 3.0, h=1):
    """Autocorrelation of y_t^2 at lag(s) ``h`` for the SV model."""
    if not abs(phi) < 1:
        raise ValueError(f"ACF requires |phi| < 1, got {phi}")
    if kappa_eps < 1:
        raise ValueError(f"kurtosis must be >= 1, got {kappa_eps}")
    h_arr = np.asarray(h)
    if np.any(h_arr < 1):
        raise ValueError("lags must be >= 1")
    sx2 = sigma * sigma / (1.0 - phi * phi)
    out = np.expm1(sx2 * np.power(float(phi), h_arr)) / (kappa_eps * math.exp(sx2) - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def theta_path_terms(phi: float, path, mu: float):
    """(initial-state quadratic, sum of squared innovations) for the latent path."""
    x = np.asarray(path, dtype=float) - mu
    innov = x[1:] - phi * x[:-1]
    return (1.0 - phi * phi) * x[0] * x[0], float(innov @ innov)


def joint_theta_logdensity(theta, mu: float, path, prior: PriorSpec) -> float:
    """Unnormalised log p(phi, sigma | mu, x_{0:n}).

    Bivariate normal prior times the stationary initial density and the n
    transition densities.  The sigma power counts all n + 1 state densities,
    so the result differs from ``prior + initial + transitions`` by a
    constant only.  Non-stationary phi gives ``-inf``.
    """
    phi, sigma = float(theta[0]), float(theta[1])
    _check_sigma(sigma)
    if not abs(phi) < 1:
        return -math.inf
    n = len(path) - 1
    init_q, innov_ss = theta_path_terms(phi, path, mu)
    return (
        prior.theta_prior.logpdf(phi, sigma)
        + 0.5 * math.log1p(-phi * phi)
        - (n + 1) * math.log(abs(sigma))
        - (init_q + innov_ss) / (2.0 * sigma * sigma)
    )
