"""Particle Gibbs with ancestor sampling for stochastic volatility models."""

from .conditionals import (
    AdapterState,
    beta2_posterior,
    mu_posterior,
    phi_posterior,
    rwm_joint_step,
    sample_beta2,
    sample_mu,
    sample_phi_normal,
    sample_sigma2_ig,
    sigma2_posterior,
)
from .diagnostics import inefficiency_factor, posterior_summary, sample_acf, state_band
from .engine import ChainOutput, FitConfig, fit, fit_msv, fit_sv_individual, fit_sv_joint
from .exceptions import ConfigError, DataError, DegenerateFilterError, SvpgasError
from .model import (
    MsvParams,
    PriorSpec,
    SvParams,
    joint_theta_logdensity,
    observation_logpdf,
    stationary_variance,
    theoretical_sv_acf,
    transition_logpdf,
)
from .particle import ParticleSystem, bootstrap_pf, cpf, cpf_as, sample_trajectory
from .simulate import simulate_msv, simulate_sv
from .stochastics import BivariateNormalSpec, make_rng, spawn_rngs

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
