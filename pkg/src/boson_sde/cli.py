"""Command-line driver: ``boson-sde <mode> --config <path> [--seed U64] [--workers K] [--out DIR]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODES, ConfigError, RunConfig, echo, parse_config
from .core import ValidationError, trace_distance
from .dnse import alpha_upper_bound, lambda_pm, trace_bound
from .fock import fock_basis
from .dynamics import dnse_rhs, integrate_meanfield, meanfield_rhs, random_unit
from .observables import expect_rho, expect_sde, sample_values
from .oracle import (
    FockModel,
    StepUnitaries,
    average_step,
    admissible_pair,
    beta_witness,
    bootstrap_trace_error,
    density_report,
    ensemble_to_rho,
    error_bound_check,
    integrate_lindblad,
    random_walk_trajectory,
)
from .sde import run_ensemble

log = logging.getLogger("boson_sde")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_CHECK_FAILED = 0, 1, 2, 3


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.16e" % float(v)
    return str(v)


def write_csv(path: Path, header: list[str], rows, seed: int) -> None:
    """CSV with a ``# seed=`` comment line, a header row and 17-significant-digit floats."""
    lines = [f"# seed={seed}", ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _parse_cell(s: str):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s) if s.lstrip("-").isdigit() else float(s)
    except ValueError:
        return s


def read_csv(path) -> tuple[dict, list[str], list[list]]:
    """Inverse of :func:`write_csv`: (comment metadata, header, typed rows)."""
    meta, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([_parse_cell(c) for c in line.split(",")])
    return meta, header or [], rows


def _times(cfg: RunConfig) -> np.ndarray:
    return cfg.sde.snapshot_steps() * cfg.sde.dt


def run_meanfield(cfg: RunConfig, workers: int):
    rhs = (lambda z: dnse_rhs(z, cfg.system.H0)) if cfg.dnse is not None else meanfield_rhs(cfg.system)
    sol = integrate_meanfield(cfg.z0, rhs, cfg.sde.t_final, cfg.sde.dt)
    N = cfg.system.N
    header = ["t"] + [f"{p}_z{j}" for j in range(N) for p in ("re", "im")] + ["norm"]
    rows = []
    for t, z in zip(sol.times, sol.states):
        rows.append([t] + [x for zj in z for x in (zj.real, zj.imag)] + [np.linalg.norm(z)])
    drift = float(np.max(np.abs(np.linalg.norm(sol.states, axis=1) - 1.0)))
    return {"meanfield.csv": (header, rows)}, {"max_norm_drift": drift}, True


def run_sde(cfg: RunConfig, workers: int):
    ens = run_ensemble(cfg.z0, cfg.system, cfg.sde, workers)
    rows = []
    for i, t in enumerate(ens.times):
        states = ens.states(i)
        for obs in cfg.observables:
            mean, err = expect_sde(obs, states, (cfg.system.n, cfg.system.N))
            rows.append([t, obs.name, mean, err, cfg.sde.samples])
    return {"sde.csv": (["t", "observable", "mean", "std_error", "samples"], rows)}, {}, True


def _rho_rows(cfg: RunConfig, model: FockModel, times, rhos):
    rows = []
    for t, rho in zip(times, rhos):
        rep = density_report(rho)
        for obs in cfg.observables:
            rows.append([t, obs.name, expect_rho(obs, rho, model.basis), np.trace(rho).real, rep.min_eigenvalue])
    return rows


RHO_HEADER = ["t", "observable", "value", "trace", "min_eigenvalue"]


def run_lindblad(cfg: RunConfig, workers: int):
    model = FockModel(cfg.system)
    sol = integrate_lindblad(model.product_density(cfg.z0), model, cfg.sde.t_final, cfg.lindblad_dt, _times(cfg))
    return {"lindblad.csv": (RHO_HEADER, _rho_rows(cfg, model, _times(cfg), sol.rhos))}, {}, True


def run_randomwalk(cfg: RunConfig, workers: int):
    model = FockModel(cfg.system)
    dt = cfg.sde.dt
    steps = cfg.sde.snapshot_steps()
    times = steps * dt
    if cfg.walk_exact:
        st = StepUnitaries(model, dt)
        rho = model.product_density(cfg.z0)
        rhos, done = [], 0
        for target in steps:
            for _ in range(target - done):
                rho = average_step(rho, st, cfg.walk_ordering)
            done = target
            rhos.append(rho.copy())
    else:
        walk = random_walk_trajectory(
            model.coherent(cfg.z0),
            model,
            dt,
            steps.max() * dt,
            seed=cfg.sde.seed,
            runs=cfg.walk_trajectories,
            snapshot_times=times,
            ordering=cfg.walk_ordering,
        )
        rhos = [walk.rho(i) for i in range(len(times))]
    return {"randomwalk.csv": (RHO_HEADER, _rho_rows(cfg, model, times, rhos))}, {}, True


def _bound(cfg: RunConfig, t: float) -> float:
    if cfg.dnse is not None and cfg.dnse.c > 0:
        return trace_bound(t, cfg.dnse.c)
    rng = np.random.default_rng(cfg.sde.seed)
    grid = random_unit(cfg.system.N, rng, cfg.grid)
    return error_bound_check(cfg.system, t, grid).bound


def run_verify(cfg: RunConfig, workers: int):
    model = FockModel(cfg.system)
    ens = run_ensemble(cfg.z0, cfg.system, cfg.sde, workers)
    sol = integrate_lindblad(model.product_density(cfg.z0), model, cfg.sde.t_final, cfg.lindblad_dt, ens.times)
    rows, ok = [], True
    for i, t in enumerate(ens.times):
        states = ens.states(i)
        td = trace_distance(ensemble_to_rho(states, model.basis), sol.rhos[i])
        sigma = bootstrap_trace_error(states, model.basis, cfg.bootstrap, seed=cfg.sde.seed)
        bound = _bound(cfg, t)
        passed = td <= bound + 3.0 * sigma
        ok &= passed
        rows.append([t, td, sigma, bound, passed])
    header = ["t", "trace_distance", "stat_error", "bound", "pass"]
    return {"verify.csv": (header, rows)}, {"all_passed": bool(ok)}, bool(ok)


def run_dnse_demo(cfg: RunConfig, workers: int):
    p = cfg.dnse
    model = FockModel(cfg.system)
    mf = integrate_meanfield(cfg.z0, lambda z: dnse_rhs(z, p.H0), cfg.sde.t_final, cfg.sde.dt)
    ens = run_ensemble(cfg.z0, cfg.system, cfg.sde, workers)
    sol = integrate_lindblad(model.product_density(cfg.z0), model, cfg.sde.t_final, cfg.lindblad_dt, ens.times)
    rows = []
    for i, t in enumerate(ens.times):
        z_mf = mf.states[int(np.argmin(np.abs(mf.times - t)))]
        for obs in cfg.observables:
            y_mf = float(sample_values(obs, z_mf[None], (p.n, p.N))[0])
            mean, err = expect_sde(obs, ens.states(i), (p.n, p.N))
            rows.append([t, obs.name, y_mf, mean, err, expect_rho(obs, sol.rhos[i], model.basis)])
    lp, lm = lambda_pm(1.0, p.c, p.n)
    summary = {
        "c": p.c,
        "lambda_plus_unit": lp,
        "lambda_minus_unit": lm,
        "alpha_upper_bound": alpha_upper_bound(p.c, p.n) if p.c > 0 else math.inf,
        "trace_bound_at_t_final": trace_bound(cfg.sde.t_final, p.c) if p.c > 0 else math.inf,
    }
    header = ["t", "observable", "meanfield", "sde_mean", "sde_std_error", "lindblad"]
    return {"dnse.csv": (header, rows)}, summary, True


def run_beta_check(cfg: RunConfig, workers: int):
    n, N = cfg.system.n, cfg.system.N
    basis = fock_basis(n, N)
    rng = np.random.default_rng(cfg.beta_seed)
    rows, ok = [], True
    for k in range(cfg.beta_draws):
        z, w = admissible_pair(rng, N)
        wit = beta_witness(z, w, n, basis)
        passed = wit <= 6 * n
        ok &= passed
        rows.append([k, wit, 6 * n, passed])
    return {"beta.csv": (["draw", "witness", "bound", "pass"], rows)}, {"all_passed": bool(ok)}, bool(ok)


RUNNERS = {
    "meanfield": run_meanfield,
    "sde": run_sde,
    "lindblad": run_lindblad,
    "randomwalk": run_randomwalk,
    "verify": run_verify,
    "dnse-demo": run_dnse_demo,
    "beta-check": run_beta_check,
}


def run(cfg: RunConfig, out_dir: Path, workers: int = 1) -> int:
    """Execute ``cfg`` and write its CSV tables plus ``manifest.json`` into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    tables, summary, ok = RUNNERS[cfg.mode](cfg, workers)
    seed = cfg.beta_seed if cfg.mode == "beta-check" else cfg.sde.seed
    for name, (header, rows) in tables.items():
        write_csv(out_dir / name, header, rows, seed)
    manifest = {
        "mode": cfg.mode,
        "seed": seed,
        "workers": workers,
        "config": echo(cfg.raw),
        "outputs": sorted(tables),
        "summary": summary,
        "passed": ok,
        "versions": {
            "boson_sde": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": time.perf_counter() - start,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boson-sde", description=__doc__.split(":")[0])
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True, type=Path, help="TOML run configuration")
    p.add_argument("--seed", type=_u64, default=None, help="overrides sde.seed and beta.seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes for trajectory ensembles")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: output.dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(args.config.read_text(), args.mode)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.sde = dataclasses.replace(cfg.sde, seed=args.seed)
        cfg.beta_seed = args.seed
    out_dir = args.out or Path(cfg.output_dir)
    log.info("running %s into %s", cfg.mode, out_dir)
    try:
        status = run(cfg, out_dir, args.workers)
    except (ValidationError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {cfg.mode} failed in {type(exc).__module__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if status == EXIT_CHECK_FAILED:
        print(f"{cfg.mode}: checks failed, see {out_dir / 'manifest.json'}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
