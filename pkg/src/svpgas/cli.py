"""Command-line front end.

Subcommands::

    svpgas simulate   --phi .92 --sigma 1.5 --beta .1 --n 1000 --output-dir out
    svpgas fit        --input out/simulated.csv --mode joint2 --output-dir fit
    svpgas fit-msv    --input panel.csv --output-dir fit
    svpgas diagnose   --input fit/theta_trace.csv --output-dir diag
    svpgas acf-theory --phi .92 --sigma 1.5 --max-lag 100

Every run writes ``manifest.txt`` and ``config.ini``; passing that
``config.ini`` back with ``--config`` reproduces the run.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .diagnostics import inefficiency_factor, posterior_summary, sample_acf, state_band
from .engine import fit
from .exceptions import ConfigError, DataError, DegenerateFilterError
from .model import MsvParams, SvParams, theoretical_sv_acf
from .simulate import simulate_msv, simulate_sv
from .stochastics import child_seeds, make_rng

log = logging.getLogger("svpgas")

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4

CLI_MODES = {"joint2": "joint-2p", "joint3": "joint-3p", "individual2": "individual-2p"}

# CLI flag destination -> (INI section, key)
_OVERRIDES = {
    "seed": ("run", "seed"),
    "iters": ("run", "iterations"),
    "burnin": ("run", "burnin"),
    "particles": ("run", "particles"),
    "adapt": ("run", "adapt"),
    "thin": ("run", "thin"),
    "state_thin": ("run", "state_thin"),
    "chains": ("run", "chains"),
    "band_level": ("model", "band_level"),
    "obs_beta": ("model", "beta"),
    "rwm_steps": ("tuning", "rwm_steps"),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svpgas", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        p.add_argument("--config", help="INI run file; flags override its keys")
        p.add_argument("--output-dir", default=".", help="directory for emitted files")
        if needs_input:
            p.add_argument("--input", required=True, help="input CSV")

    sim = sub.add_parser("simulate", help="simulate SV or MSV data")
    common(sim, needs_input=False)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--phi", type=float)
    sim.add_argument("--sigma", type=float)
    sim.add_argument("--mu", type=float)
    sim.add_argument("--beta", type=float, help="observation scale (univariate)")
    sim.add_argument("--betas", help="comma-separated asset scales (multivariate)")
    sim.add_argument("--n", type=int, help="number of returns")

    for name, help_text in (("fit", "univariate particle Gibbs"), ("fit-msv", "multivariate particle Gibbs")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--columns", help="comma-separated input columns to use")
        p.add_argument("--seed", type=int)
        p.add_argument("--particles", type=int)
        p.add_argument("--iters", type=int)
        p.add_argument("--burnin", type=int)
        p.add_argument("--thin", type=int)
        p.add_argument("--state-thin", type=int)
        p.add_argument("--adapt", choices=("on", "off", "burnin"))
        p.add_argument("--rwm-steps", type=int)
        p.add_argument("--chains", type=int)
        p.add_argument("--band-level", type=float)
        if name == "fit":
            p.add_argument("--mode", choices=tuple(CLI_MODES))
            p.add_argument("--beta", dest="obs_beta", type=float,
                           help="fixed observation scale")

    diag = sub.add_parser("diagnose", help="ACF, inefficiency factors and summaries of a trace CSV")
    common(diag)
    diag.add_argument("--max-lag", type=int, default=50)

    acf = sub.add_parser("acf-theory", help="theoretical ACF of squared SV returns")
    acf.add_argument("--output-dir", default=".")
    acf.add_argument("--phi", type=float, required=True)
    acf.add_argument("--sigma", type=float, required=True)
    acf.add_argument("--kappa", type=float, default=3.0, help="kurtosis of the return noise")
    acf.add_argument("--max-lag", type=int, default=100)
    return parser


def _load_sections(args) -> dict:
    sections = io.read_config(args.config) if args.config else io.parse_sections({})
    for dest, (section, key) in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is not None:
            sections[section][key] = value
    return sections


def _finish(out_dir: Path, command: str, sections, seed, outputs, started, input_path=None):
    io.write_config(out_dir / "config.ini", sections)
    fields = {
        "command": command,
        "config": sections,
        "seed": str(seed),
        "input": "" if input_path is None else str(input_path),
        "input_sha256": "" if input_path is None else io.file_digest(input_path),
        "outputs": sorted([*outputs, "config.ini", "manifest.txt"]),
        "wall_clock_seconds": f"{time.perf_counter() - started:.3f}",
    }
    io.write_manifest(out_dir / "manifest.txt", fields)
    return fields


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    sections = _load_sections(args)
    sim = sections["simulate"]
    for key in ("phi", "sigma", "mu", "beta", "betas", "n"):
        v = getattr(args, key)
        if v is not None:
            sim[key] = v
    seed = args.seed if args.seed is not None else sections["run"].get("seed", 0)
    sections["run"] = {"seed": seed}
    problems = [f"{k}: required" for k in ("phi", "sigma", "n") if k not in sim]
    if "n" in sim and sim["n"] < 1:
        problems.append(f"n: must be >= 1, got {sim['n']}")
    betas = None
    if "betas" in sim:
        try:
            betas = [float(b) for b in str(sim["betas"]).split(",")]
        except ValueError:
            problems.append(f"betas: cannot parse {sim['betas']!r}")
        if "mu" in sim:
            problems.append("mu: the multivariate model has no level; drop mu or betas")
    if problems:
        raise ConfigError(problems)
    try:
        if betas is not None:
            params = MsvParams(sim["phi"], sim["sigma"], betas)
            x, y = simulate_msv(params, sim["n"], make_rng(seed))
        else:
            params = SvParams(sim["phi"], sim["sigma"], sim.get("mu", 0.0), sim.get("beta", 1.0))
            x, y = simulate_sv(params, sim["n"], make_rng(seed))
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n, p = y.shape
    y_cols = [[None] + list(y[:, i]) for i in range(p)]
    io.write_table(out_dir / "simulated.csv", ["t", "x"] + [f"y{i + 1}" for i in range(p)],
                   [list(range(n + 1)), list(x)] + y_cols)
    _finish(out_dir, "simulate", sections, seed, ["simulated.csv"], started)
    return EXIT_OK


def _write_fit_outputs(out_dir: Path, result, sections, mode: str) -> list[str]:
    cfg = result.config
    iters = list(range(cfg["burnin"] + 1, cfg["iterations"] + 1, cfg["thin"]))
    header = ["iter", "phi", "sigma"]
    cols = [iters, result.phi, result.sigma]
    if result.mu_trace is not None:
        header.append("mu")
        cols.append(result.mu_trace)
    io.write_table(out_dir / "theta_trace.csv", header, cols)
    outputs = ["theta_trace.csv"]
    if result.beta_trace is not None:
        p = result.beta_trace.shape[1]
        io.write_table(out_dir / "betas.csv", ["iter"] + [f"beta{i + 1}" for i in range(p)],
                       [iters] + [result.beta_trace[:, i] for i in range(p)])
        outputs.append("betas.csv")
    if result.state_draws.shape[0] >= 2:
        band = state_band(result.state_draws, sections["model"].get("band_level", 0.95))
        io.write_table(out_dir / "state_band.csv", ["t", "mean", "lower", "upper"],
                       [band["t"], band["mean"], band["lower"], band["upper"]])
        outputs.append("state_band.csv")
    else:
        log.warning("fewer than two retained state draws; state_band.csv not written")
    return outputs


def _fit_one(y, sections, mode, out_dir: Path):
    """Run one chain and write its tables; returns the output names."""
    cfg = io.build_fit_config(sections, mode)
    result = fit(y, cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    log.info("chain seed %d: acceptance %.3f, %.1fs", cfg.seed, result.acceptance_rate, result.seconds)
    return _write_fit_outputs(out_dir, result, sections, mode)


def _chain_job(job):
    y, sections, mode, out_dir, input_path, started = job
    outputs = _fit_one(y, sections, mode, Path(out_dir))
    _finish(Path(out_dir), "fit-msv" if mode == "msv" else "fit", sections,
            sections["run"].get("seed", 0), outputs, started, input_path)
    return outputs


def cmd_fit(args, msv: bool) -> int:
    started = time.perf_counter()
    sections = _load_sections(args)
    if msv:
        mode = "msv"
    elif args.mode is not None:
        mode = CLI_MODES[args.mode]
    else:
        mode = sections["run"].get("mode", "joint-2p")
        mode = CLI_MODES.get(mode, mode)
    sections["run"]["mode"] = mode
    # validate before touching the data so config errors take precedence;
    # the resolved values are what gets echoed to config.ini
    cfg = io.build_fit_config(sections, mode)
    sections = io.config_to_sections(cfg, sections["run"].get("chains", 1),
                                     sections["model"].get("band_level", 0.95))
    columns = args.columns.split(",") if args.columns else None
    panel = io.load_returns_csv(args.input, columns)
    if not msv and panel.p != 1:
        raise DataError(f"{args.input}: fit needs one return column, found {panel.p}; "
                        "use --columns or fit-msv")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    command = "fit-msv" if msv else "fit"
    chains = sections["run"].get("chains", 1)
    seed = sections["run"].get("seed", 0)
    if chains == 1:
        outputs = _fit_one(panel.values, sections, mode, out_dir)
        _finish(out_dir, command, sections, seed, outputs, started, args.input)
        return EXIT_OK
    jobs = []
    for k, s in enumerate(child_seeds(seed, chains)):
        sub = {sec: dict(items) for sec, items in sections.items()}
        sub["run"]["seed"] = int(s)
        sub["run"]["chains"] = 1
        jobs.append((panel.values, sub, mode, str(out_dir / f"chain_{k:02d}"), args.input, started))
    with ProcessPoolExecutor(max_workers=chains) as pool:
        list(pool.map(_chain_job, jobs))
    names = [f"chain_{k:02d}" for k in range(chains)]
    _finish(out_dir, command, sections, seed, names, started, args.input)
    return EXIT_OK


def _read_trace(path):
    panel = io.load_returns_csv(path)
    keep = [i for i, c in enumerate(panel.columns) if c != "iter"]
    if not keep:
        raise DataError(f"{path}: no trace columns besides 'iter'")
    return [panel.columns[i] for i in keep], panel.values[:, keep]


def cmd_diagnose(args) -> int:
    started = time.perf_counter()
    sections = _load_sections(args)
    if args.max_lag < 1:
        raise ConfigError([f"max-lag: must be >= 1, got {args.max_lag}"])
    names, values = _read_trace(args.input)
    if values.shape[0] <= args.max_lag:
        raise DataError(f"{args.input}: {values.shape[0]} draws, need more than max-lag={args.max_lag}")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        acfs = [sample_acf(values[:, i], args.max_lag) for i in range(len(names))]
        rows = []
        for i in range(len(names)):
            s = posterior_summary(values[:, i])
            s["inefficiency"] = inefficiency_factor(values[:, i])
            rows.append(s)
    except ValueError as exc:
        raise DataError(f"{args.input}: {exc}") from None
    io.write_table(out_dir / "acf.csv", ["lag"] + names,
                   [list(range(1, args.max_lag + 1))] + acfs)
    keys = ["mean", "sd", "q025", "q500", "q975", "inefficiency"]
    io.write_table(out_dir / "diagnostics.csv", ["param"] + keys,
                   [names] + [[r[k] for r in rows] for k in keys])
    if values.shape[1] >= 2 and "phi" in names and "sigma" in names:
        corr = float(np.corrcoef(values[:, names.index("phi")], values[:, names.index("sigma")])[0, 1])
        print(f"corr(phi, sigma) = {corr:.4f}")
    for name, r in zip(names, rows):
        print(f"{name}: mean {r['mean']:.4g}, 95% [{r['q025']:.4g}, {r['q975']:.4g}], IF {r['inefficiency']:.2f}")
    _finish(out_dir, "diagnose", sections, "", ["acf.csv", "diagnostics.csv"], started, args.input)
    return EXIT_OK


def cmd_acf_theory(args) -> int:
    started = time.perf_counter()
    if args.max_lag < 1:
        raise ConfigError([f"max-lag: must be >= 1, got {args.max_lag}"])
    lags = np.arange(1, args.max_lag + 1)
    try:
        values = theoretical_sv_acf(args.phi, args.sigma, args.kappa, lags)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_table(out_dir / "acf_theory.csv", ["lag", "value"], [lags, values])
    io.write_manifest(out_dir / "manifest.txt", {
        "command": "acf-theory",
        "config": {"phi": args.phi, "sigma": args.sigma, "kappa": args.kappa, "max_lag": args.max_lag},
        "seed": "",
        "input": "",
        "input_sha256": "",
        "outputs": ["acf_theory.csv", "manifest.txt"],
        "wall_clock_seconds": f"{time.perf_counter() - started:.3f}",
    })
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "simulate": cmd_simulate,
        "fit": lambda a: cmd_fit(a, msv=False),
        "fit-msv": lambda a: cmd_fit(a, msv=True),
        "diagnose": cmd_diagnose,
        "acf-theory": cmd_acf_theory,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"svpgas: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"svpgas: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DegenerateFilterError, FloatingPointError) as exc:
        print(f"svpgas: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        print(f"svpgas: error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
