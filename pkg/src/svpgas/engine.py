"""Particle Gibbs chains for the SV and MSV models.

Each sweep draws the latent path with the ancestor-sampling conditional
filter and then updates the parameters given that path:

* ``joint-2p`` / ``joint-3p``: (phi, sigma) by one adaptive random-walk
  Metropolis step, then the level mu (3p only).
* ``individual-2p``: phi and sigma^2 one at a time from their conjugate
  conditionals (the baseline the joint update is compared with).
* ``msv``: (phi, sigma) as in the joint modes, then every asset scale.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .conditionals import (
    AdapterState,
    rwm_joint_step,
    sample_beta2,
    sample_mu,
    sample_phi_normal,
    sample_sigma2_ig,
)
from .exceptions import ConfigError
from .model import MsvParams, PriorSpec, SvParams, as_panel
from .particle import cpf_as, sample_trajectory
from .stochastics import make_rng

log = logging.getLogger(__name__)

MODES = ("joint-2p", "joint-3p", "individual-2p", "msv")
ADAPT_CHOICES = ("on", "off", "burnin")


@dataclass
class FitConfig:
    """Run control for one chain.

    ``adapt`` is ``"on"`` (adapt every sweep), ``"off"`` (fixed proposal) or
    ``"burnin"`` (adapt during burn-in, then freeze so the retained draws
    come from a fixed kernel).  ``beta`` is the fixed observation scale of
    the univariate modes.
    """

    n_particles: int = 20
    iterations: int = 1000
    burnin: int = 100
    adapt: str = "on"
    seed: int = 0
    prior: PriorSpec = field(default_factory=PriorSpec)
    mode: str = "joint-2p"
    thin: int = 1
    state_thin: int = 10
    beta: float = 1.0
    theta0: tuple[float, float] | None = None
    mu0: float = 0.0
    alpha_star: float = 0.234
    gamma_exponent: float = 0.6
    lambda0: float = 2.38 ** 2 / 2
    cov0: tuple[float, float] = (0.01, 0.01)
    rwm_steps: int = 1

    def __post_init__(self):
        if isinstance(self.adapt, bool):
            self.adapt = "on" if self.adapt else "off"

    def problems(self) -> list[str]:
        out = []
        if self.mode not in MODES:
            out.append(f"mode: {self.mode!r} not in {MODES}")
        if self.adapt not in ADAPT_CHOICES:
            out.append(f"adapt: {self.adapt!r} not in {ADAPT_CHOICES}")
        if not (isinstance(self.iterations, int) and self.iterations >= 1):
            out.append(f"iterations: must be a positive integer, got {self.iterations!r}")
        if not (isinstance(self.burnin, int) and self.burnin >= 0):
            out.append(f"burnin: must be a non-negative integer, got {self.burnin!r}")
        elif isinstance(self.iterations, int) and not self.iterations > self.burnin:
            out.append(f"iterations: must exceed burnin ({self.iterations} <= {self.burnin})")
        if not (isinstance(self.n_particles, int) and self.n_particles >= 2):
            out.append(f"n_particles: conditional filters need >= 2, got {self.n_particles!r}")
        if not (isinstance(self.thin, int) and self.thin >= 1):
            out.append(f"thin: must be a positive integer, got {self.thin!r}")
        if not (isinstance(self.state_thin, int) and self.state_thin >= 1):
            out.append(f"state_thin: must be a positive integer, got {self.state_thin!r}")
        if not (isinstance(self.rwm_steps, int) and self.rwm_steps >= 1):
            out.append(f"rwm_steps: must be a positive integer, got {self.rwm_steps!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            out.append(f"seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.beta > 0:
            out.append(f"beta: must be positive, got {self.beta!r}")
        if not 0 < self.alpha_star < 1:
            out.append(f"alpha_star: must lie in (0, 1), got {self.alpha_star!r}")
        if not 0.5 < self.gamma_exponent <= 1:
            out.append(f"gamma_exponent: must lie in (0.5, 1], got {self.gamma_exponent!r}")
        if not self.lambda0 > 0:
            out.append(f"lambda0: must be positive, got {self.lambda0!r}")
        if not all(c > 0 for c in self.cov0):
            out.append(f"cov0: diagonal entries must be positive, got {self.cov0!r}")
        if self.theta0 is not None:
            phi0, sigma0 = self.theta0
            if not abs(phi0) < 1:
                out.append(f"theta0: initial phi must satisfy |phi| < 1, got {phi0!r}")
            if sigma0 == 0:
                out.append("theta0: initial sigma must be nonzero")
        return out

    def validate(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def echo(self) -> dict:
        d = asdict(self)
        d["prior"] = {
            "theta_mean": list(self.prior.theta_prior.mean),
            "theta_sd": list(self.prior.theta_prior.sd),
            "theta_corr": self.prior.theta_prior.corr,
            "ig_state": list(self.prior.ig_state),
            "ig_beta": [list(p) for p in self.prior.ig_beta],
        }
        return d


@dataclass
class ChainOutput:
    """Retained draws of one chain.

    ``accepted`` logs the Metropolis decision of every sweep, burn-in
    included; ``acceptance_rate`` covers the retained sweeps only.
    """

    theta_trace: np.ndarray
    mu_trace: np.ndarray | None
    beta_trace: np.ndarray | None
    state_draws: np.ndarray
    accepted: np.ndarray
    acceptance_rate: float
    config: dict
    seed: int
    seconds: float
    adapter: AdapterState | None = None

    @property
    def phi(self) -> np.ndarray:
        return self.theta_trace[:, 0]

    @property
    def sigma(self) -> np.ndarray:
        return self.theta_trace[:, 1]


def _initial_theta(config: FitConfig) -> np.ndarray:
    if config.theta0 is not None:
        return np.array(config.theta0, dtype=float)
    return np.array(config.prior.theta_prior.mean, dtype=float)


def _run_chain(y, config: FitConfig, rng, expected_modes):
    config.validate()
    if config.mode not in expected_modes:
        raise ConfigError([f"mode: {config.mode!r} not accepted here (expected one of {expected_modes})"])
    if rng is None:
        rng = make_rng(config.seed)
    y = as_panel(y)
    n, p = y.shape
    mode = config.mode
    if mode != "msv" and p != 1:
        raise ConfigError([f"mode: {mode!r} needs univariate returns, got {p} columns"])

    theta = _initial_theta(config)
    if not abs(theta[0]) < 1 or theta[1] == 0:
        raise ConfigError([f"theta0: initial value {tuple(theta)} is outside |phi| < 1, sigma != 0"])
    mu = float(config.mu0) if mode == "joint-3p" else 0.0
    betas = np.sqrt(np.mean(y * y, axis=0)) if mode == "msv" else None

    def params():
        if mode == "msv":
            return MsvParams(theta[0], theta[1], betas)
        return SvParams(theta[0], theta[1], mu, config.beta)

    adapter = AdapterState.initial(
        theta, lam=config.lambda0, cov=np.diag(config.cov0),
        alpha_star=config.alpha_star, gamma_exponent=config.gamma_exponent,
    )
    beta_priors = config.prior.ig_beta_for(p) if mode == "msv" else None

    retained = range(config.burnin, config.iterations)
    m = len(range(0, len(retained), config.thin))
    k = len(range(0, len(retained), config.state_thin))
    theta_trace = np.empty((m, 2))
    mu_trace = np.empty(m) if mode == "joint-3p" else None
    beta_trace = np.empty((m, p)) if mode in ("msv", "joint-3p") else None
    state_draws = np.empty((k, n + 1))
    accepted = np.zeros(config.iterations, dtype=bool)
    accept_frac = np.ones(config.iterations)

    start = time.perf_counter()
    path = sample_trajectory(y, params(), config.n_particles, rng)
    i_keep = i_state = 0
    for j in range(config.iterations):
        path = cpf_as(y, params(), config.n_particles, path, rng)
        if mode == "individual-2p":
            phi = sample_phi_normal(theta[1], path, config.prior.phi_normal, rng, stationary=True)
            sigma2 = sample_sigma2_ig(phi, path, config.prior.ig_state, rng)
            theta = np.array([phi, math.sqrt(sigma2)])
            accepted[j] = True
        else:
            adapt_now = config.adapt == "on" or (config.adapt == "burnin" and j < config.burnin)
            n_acc = 0
            for _ in range(config.rwm_steps):
                theta, acc, adapter = rwm_joint_step(
                    theta, mu, path, config.prior, adapter, adapt_now, rng
                )
                n_acc += acc
            accepted[j] = n_acc > 0
            accept_frac[j] = n_acc / config.rwm_steps
            if mode == "joint-3p":
                mu = sample_mu(theta, path, rng)
            elif mode == "msv":
                betas = np.sqrt([
                    sample_beta2(y[:, i], path, beta_priors[i], rng) for i in range(p)
                ])
        offset = j - config.burnin
        if offset < 0:
            continue
        if offset % config.thin == 0:
            theta_trace[i_keep] = theta
            if mode == "joint-3p":
                mu_trace[i_keep] = mu
                beta_trace[i_keep, 0] = config.beta * math.exp(mu / 2.0)
            elif mode == "msv":
                beta_trace[i_keep] = betas
            i_keep += 1
        if offset % config.state_thin == 0:
            state_draws[i_state] = path
            i_state += 1
    seconds = time.perf_counter() - start
    rate = float(accept_frac[config.burnin:].mean())
    log.info("%s chain: %d sweeps in %.1fs, acceptance %.3f", mode, config.iterations, seconds, rate)
    return ChainOutput(
        theta_trace=theta_trace,
        mu_trace=mu_trace,
        beta_trace=beta_trace,
        state_draws=state_draws,
        accepted=accepted,
        acceptance_rate=rate,
        config=config.echo(),
        seed=config.seed,
        seconds=seconds,
        adapter=None if mode == "individual-2p" else adapter,
    )


def fit_sv_joint(y, config: FitConfig, rng=None) -> ChainOutput:
    """Joint (phi, sigma) particle Gibbs for univariate returns (2p or 3p)."""
    return _run_chain(y, config, rng, ("joint-2p", "joint-3p"))


def fit_sv_individual(y, config: FitConfig, rng=None) -> ChainOutput:
    """Baseline particle Gibbs drawing phi and sigma^2 one at a time (mu = 0)."""
    return _run_chain(y, config, rng, ("individual-2p",))


def fit_msv(y, config: FitConfig, rng=None) -> ChainOutput:
    """Joint particle Gibbs for the one-factor multivariate model."""
    return _run_chain(y, config, rng, ("msv",))


def fit(y, config: FitConfig, rng=None) -> ChainOutput:
    """Dispatch on ``config.mode``."""
    if config.mode == "individual-2p":
        return fit_sv_individual(y, config, rng)
    if config.mode == "msv":
        return fit_msv(y, config, rng)
    return fit_sv_joint(y, config, rng)
