"""Trace diagnostics: sample ACF, inefficiency factor, summaries, state bands."""

from __future__ import annotations

import numpy as np


def _trace(trace, min_len=2) -> np.ndarray:
    x = np.asarray(trace, dtype=float).ravel()
    if x.size < min_len:
        raise ValueError(f"trace needs at least {min_len} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("trace contains non-finite values")
    if np.ptp(x) == 0:
        raise ValueError("trace is constant; autocorrelation is undefined")
    return x


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased (divide-by-n) autocovariances at lags 0..n-1 via FFT."""
    n = x.size
    d = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(d, size)
    return np.fft.irfft(f * np.conj(f), size)[:n] / n


def sample_acf(trace, max_lag: int) -> np.ndarray:
    """Autocorrelations at lags 1..max_lag."""
    max_lag = int(max_lag)
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    x = _trace(trace, max_lag + 1)
    acov = _autocovariance(x)
    return acov[1:max_lag + 1] / acov[0]


def inefficiency_factor(trace) -> float:
    """1 + 2 * sum of autocorrelations, truncated by Geyer's initial positive sequence.

    Consecutive lag pairs (0,1), (2,3), ... are summed while the pair sum
    stays positive.  Strongly antithetic traces are floored at 1/n.
    """
    x = _trace(trace, 100)
    rho = _autocovariance(x)
    rho = rho / rho[0]
    n_pairs = rho.size // 2
    pair_sums = rho[0:2 * n_pairs:2] + rho[1:2 * n_pairs:2]
    nonpos = np.nonzero(pair_sums <= 0)[0]
    stop = nonpos[0] if nonpos.size else n_pairs
    value = -1.0 + 2.0 * float(pair_sums[:stop].sum())
    return max(value, 1.0 / x.size)


def posterior_summary(trace) -> dict:
    x = np.asarray(trace, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty trace")
    q = np.quantile(x, [0.025, 0.5, 0.975])
    return {
        "mean": float(x.mean()),
        "sd": float(x.std()),
        "q025": float(q[0]),
        "q500": float(q[1]),
        "q975": float(q[2]),
    }


def state_band(state_draws, level: float = 0.95) -> dict:
    """Pointwise mean and central ``level`` quantile band of sampled paths."""
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    try:
        draws = np.asarray(state_draws, dtype=float)
    except ValueError as exc:
        raise ValueError("state draws have ragged lengths") from exc
    if draws.ndim != 2:
        raise ValueError("state draws have ragged lengths or wrong rank")
    if draws.shape[0] < 2:
        raise ValueError("need at least two state draws")
    tail = 0.5 * (1.0 - level)
    lower, upper = np.quantile(draws, [tail, 1.0 - tail], axis=0)
    return {
        "t": np.arange(draws.shape[1]),
        "mean": draws.mean(axis=0),
        "lower": lower,
        "upper": upper,
    }
