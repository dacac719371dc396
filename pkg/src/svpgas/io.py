"""CSV ingestion/emission, INI run configuration and run manifests."""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import FitConfig
from .exceptions import ConfigError, DataError
from .model import PriorSpec
from .stochastics import BivariateNormalSpec

NUMBER_FORMAT = "{:.17g}"


@dataclass
class ReturnsPanel:
    values: np.ndarray
    columns: list[str]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def fmt(v) -> str:
    return NUMBER_FORMAT.format(float(v))


def _is_simulator_layout(header):
    lower = [h.strip().lower() for h in header]
    return "t" in lower and "x" in lower and any(h.startswith("y") for h in lower)


def load_returns_csv(path, columns=None) -> ReturnsPanel:
    """Read an n x p panel of returns.

    Files written by the ``simulate`` command (columns ``t, x, y1..yp``) are
    recognised: only the ``y`` columns are read and the ``t = 0`` row, which
    carries the initial state only, is skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file (a header row is required)")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if columns is None and _is_simulator_layout(header):
        columns = [h for h in header if h.lower().startswith("y")]
        t_col = [h.lower() for h in header].index("t")
        if body and body[0][t_col].strip() in ("0", "0.0"):
            body = body[1:]
    if columns is None:
        columns = header
    missing = [c for c in columns if c not in header]
    if missing:
        raise DataError(f"{path}: columns not found in header: {missing}")
    if not columns:
        raise DataError(f"{path}: no numeric columns")
    if not body:
        raise DataError(f"{path}: no data rows")
    idx = [header.index(c) for c in columns]
    out = np.empty((len(body), len(idx)))
    first_line = len(rows) - len(body) + 1
    for i, row in enumerate(body):
        line = first_line + i
        if len(row) != len(header):
            raise DataError(f"{path}: line {line} has {len(row)} cells, header has {len(header)}")
        for k, j in enumerate(idx):
            cell = row[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: line {line}, column {header[j]!r}: non-numeric cell {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: line {line}, column {header[j]!r}: non-finite value {cell!r}")
            out[i, k] = v
    return ReturnsPanel(out, list(columns))


def write_table(path, header, columns) -> Path:
    """Write equal-length columns as CSV, floats with 17 significant digits.

    ``None`` entries become empty cells; ints and strings are written as is.
    """
    path = Path(path)
    cols = [list(c) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns have different lengths")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(n):
            w.writerow([_cell(c[i]) for c in cols])
    return path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, fields: dict) -> Path:
    """One ``key: value`` line per field; non-string values as compact JSON."""
    path = Path(path)
    with path.open("w") as fh:
        for k, v in fields.items():
            text = v if isinstance(v, str) else json.dumps(v, sort_keys=True, separators=(",", ":"))
            fh.write(f"{k}: {text}\n")
    return path


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        k, _, v = line.partition(": ")
        out[k] = v
    return out


# INI keys: section -> key -> (FitConfig attribute or prior field, parser)
_RUN_KEYS = {
    "seed": int, "iterations": int, "burnin": int, "thin": int, "state_thin": int,
    "particles": int, "mode": str, "adapt": str, "chains": int,
}
_PRIOR_KEYS = {
    "phi_mean": float, "sigma_mean": float, "phi_sd": float, "sigma_sd": float,
    "corr": float, "a0": float, "b0": float, "beta_a": float, "beta_b": float,
}
_TUNING_KEYS = {
    "alpha_star": float, "gamma_exponent": float, "lambda0": float,
    "cov0_phi": float, "cov0_sigma": float, "rwm_steps": int,
}
_MODEL_KEYS = {"beta": float, "phi0": float, "sigma0": float, "mu0": float, "band_level": float}
_SIMULATE_KEYS = {"phi": float, "sigma": float, "mu": float, "beta": float, "betas": str, "n": int}

SECTIONS = {
    "run": _RUN_KEYS, "prior": _PRIOR_KEYS, "tuning": _TUNING_KEYS,
    "model": _MODEL_KEYS, "simulate": _SIMULATE_KEYS,
}


def read_config(path) -> dict:
    """Parse an INI run file into ``{section: {key: typed value}}``.

    Unknown sections/keys and unparsable values are all reported together.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config: file not found: {path}"])
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError([f"config: {exc}"]) from None
    return parse_sections({s: dict(cp.items(s)) for s in cp.sections()})


def parse_sections(raw: dict) -> dict:
    problems = []
    out = {s: {} for s in SECTIONS}
    for section, items in raw.items():
        keys = SECTIONS.get(section)
        if keys is None:
            problems.append(f"[{section}]: unknown section")
            continue
        for key, text in items.items():
            conv = keys.get(key)
            if conv is None:
                problems.append(f"[{section}] {key}: unknown key")
                continue
            try:
                out[section][key] = conv(str(text).strip())
            except ValueError:
                problems.append(f"[{section}] {key}: cannot parse {text!r} as {conv.__name__}")
    if problems:
        raise ConfigError(problems)
    return out


def build_fit_config(sections: dict, mode: str) -> FitConfig:
    """FitConfig from parsed sections; every invalid field is reported."""
    run, pri, tun, mod = (sections.get(k, {}) for k in ("run", "prior", "tuning", "model"))
    problems = []
    base_prior = PriorSpec()
    tp = base_prior.theta_prior
    try:
        theta_prior = BivariateNormalSpec(
            mean=(pri.get("phi_mean", tp.mean[0]), pri.get("sigma_mean", tp.mean[1])),
            sd=(pri.get("phi_sd", tp.sd[0]), pri.get("sigma_sd", tp.sd[1])),
            corr=pri.get("corr", tp.corr),
        )
    except ValueError as exc:
        problems.append(f"prior: {exc}")
        theta_prior = tp
    try:
        prior = PriorSpec(
            theta_prior=theta_prior,
            ig_state=(pri.get("a0", base_prior.ig_state[0]), pri.get("b0", base_prior.ig_state[1])),
            ig_beta=((pri.get("beta_a", base_prior.ig_beta[0][0]), pri.get("beta_b", base_prior.ig_beta[0][1])),),
        )
    except ValueError as exc:
        problems.append(f"prior: {exc}")
        prior = base_prior
    theta0 = None
    if "phi0" in mod or "sigma0" in mod:
        theta0 = (mod.get("phi0", theta_prior.mean[0]), mod.get("sigma0", theta_prior.mean[1]))
    defaults = FitConfig()
    cfg = FitConfig(
        n_particles=run.get("particles", defaults.n_particles),
        iterations=run.get("iterations", defaults.iterations),
        burnin=run.get("burnin", defaults.burnin),
        adapt=run.get("adapt", defaults.adapt),
        seed=run.get("seed", defaults.seed),
        prior=prior,
        mode=mode,
        thin=run.get("thin", defaults.thin),
        state_thin=run.get("state_thin", defaults.state_thin),
        beta=mod.get("beta", defaults.beta),
        theta0=theta0,
        mu0=mod.get("mu0", defaults.mu0),
        alpha_star=tun.get("alpha_star", defaults.alpha_star),
        gamma_exponent=tun.get("gamma_exponent", defaults.gamma_exponent),
        lambda0=tun.get("lambda0", defaults.lambda0),
        cov0=(tun.get("cov0_phi", defaults.cov0[0]), tun.get("cov0_sigma", defaults.cov0[1])),
        rwm_steps=tun.get("rwm_steps", defaults.rwm_steps),
    )
    problems += cfg.problems()
    if "chains" in run and run["chains"] < 1:
        problems.append(f"chains: must be >= 1, got {run['chains']}")
    level = mod.get("band_level", 0.95)
    if not 0 < level < 1:
        problems.append(f"band_level: must lie in (0, 1), got {level}")
    if problems:
        raise ConfigError(problems)
    return cfg


def config_to_sections(cfg: FitConfig, chains: int = 1, band_level: float = 0.95) -> dict:
    tp = cfg.prior.theta_prior
    return {
        "run": {
            "seed": cfg.seed, "iterations": cfg.iterations, "burnin": cfg.burnin,
            "thin": cfg.thin, "state_thin": cfg.state_thin, "particles": cfg.n_particles,
            "mode": cfg.mode, "adapt": cfg.adapt, "chains": chains,
        },
        "prior": {
            "phi_mean": tp.mean[0], "sigma_mean": tp.mean[1], "phi_sd": tp.sd[0],
            "sigma_sd": tp.sd[1], "corr": tp.corr, "a0": cfg.prior.ig_state[0],
            "b0": cfg.prior.ig_state[1], "beta_a": cfg.prior.ig_beta[0][0],
            "beta_b": cfg.prior.ig_beta[0][1],
        },
        "tuning": {
            "alpha_star": cfg.alpha_star, "gamma_exponent": cfg.gamma_exponent,
            "lambda0": cfg.lambda0, "cov0_phi": cfg.cov0[0], "cov0_sigma": cfg.cov0[1],
            "rwm_steps": cfg.rwm_steps,
        },
        "model": {
            "beta": cfg.beta,
            **({} if cfg.theta0 is None else {"phi0": cfg.theta0[0], "sigma0": cfg.theta0[1]}),
            "mu0": cfg.mu0, "band_level": band_level,
        },
    }


def write_config(path, sections: dict) -> Path:
    """Echo a resolved configuration as INI (floats at full precision)."""
    path = Path(path)
    cp = configparser.ConfigParser()
    for section, items in sections.items():
        cp[section] = {
            k: (fmt(v) if isinstance(v, float) else str(v)) for k, v in items.items()
        }
    with path.open("w") as fh:
        cp.write(fh)
    return path
