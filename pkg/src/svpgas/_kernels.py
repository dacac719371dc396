"""Compiled inner loops for the particle filters.

Randomness is passed in as pre-drawn arrays so the compiled code never owns
an RNG; the caller's generator fully determines the output.
"""

import math

import numpy as np
from numba import njit

BOOTSTRAP = 0
CONDITIONAL = 1
ANCESTOR_SAMPLING = 2


@njit(cache=True)
def _pick(cum, v):
    # first index with cum[k] > v
    lo = 0
    hi = cum.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > v:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def _cumulative(logw, out):
    """Fill ``out`` with cumulative exp(logw - max); return (max, total)."""
    m = -np.inf
    for k in range(logw.size):
        if logw[k] > m:
            m = logw[k]
    if not (m > -np.inf) or not math.isfinite(m):
        return m, 0.0
    acc = 0.0
    for k in range(logw.size):
        acc += math.exp(logw[k] - m)
        out[k] = acc
    return m, acc


@njit(cache=True)
def run_filter(s_obs, obs_const, p, phi, sigma, mu, ref, mode, z, u, u_anc):
    """Bootstrap / conditional / ancestor-sampling particle filter.

    Returns (values, ancestors, logw, loglik, failed_t) where ``failed_t`` is
    -1 on success and otherwise the first time index whose weights collapsed.
    """
    n = s_obs.size
    N = z.shape[1]
    values = np.empty((n + 1, N))
    ancestors = np.empty((n, N), dtype=np.int64)
    logw = np.zeros((n + 1, N))
    cum = np.empty(N)
    anc_logw = np.empty(N)
    n_free = N if mode == BOOTSTRAP else N - 1
    sd0 = abs(sigma) / math.sqrt(1.0 - phi * phi)
    inv_s2 = 1.0 / (sigma * sigma)
    half_p = 0.5 * p
    loglik = 0.0
    log_n = math.log(N)

    for j in range(n_free):
        values[0, j] = mu + sd0 * z[0, j]
    if mode != BOOTSTRAP:
        values[0, N - 1] = ref[0]

    for t in range(1, n + 1):
        m, total = _cumulative(logw[t - 1], cum)
        if total == 0.0:
            return values, ancestors, logw, loglik, t - 1
        for j in range(n_free):
            a = _pick(cum, u[t - 1, j] * total)
            ancestors[t - 1, j] = a
            values[t, j] = mu + phi * (values[t - 1, a] - mu) + sigma * z[t, j]
        if mode != BOOTSTRAP:
            xr = ref[t]
            values[t, N - 1] = xr
            if mode == CONDITIONAL:
                ancestors[t - 1, N - 1] = N - 1
            else:
                for k in range(N):
                    r = xr - mu - phi * (values[t - 1, k] - mu)
                    anc_logw[k] = logw[t - 1, k] - 0.5 * r * r * inv_s2
                _, total2 = _cumulative(anc_logw, cum)
                if total2 == 0.0:
                    return values, ancestors, logw, loglik, t - 1
                ancestors[t - 1, N - 1] = _pick(cum, u_anc[t - 1] * total2)
        for j in range(N):
            x = values[t, j]
            lw = obs_const - half_p * x - 0.5 * s_obs[t - 1] * math.exp(-x)
            if math.isnan(lw):
                lw = -np.inf
            logw[t, j] = lw
        m, total = _cumulative(logw[t], cum)
        if total == 0.0:
            return values, ancestors, logw, loglik, t
        loglik += m + math.log(total) - log_n
    return values, ancestors, logw, loglik, -1


@njit(cache=True)
def backtrack(values, ancestors, index):
    n = ancestors.shape[0]
    out = np.empty(n + 1)
    b = index
    out[n] = values[n, b]
    for t in range(n, 0, -1):
        b = ancestors[t - 1, b]
        out[t - 1] = values[t - 1, b]
    return out


@njit(cache=True)
def draw_final(logw_last, u):
    cum = np.empty(logw_last.size)
    m, total = _cumulative(logw_last, cum)
    return _pick(cum, u * total)
