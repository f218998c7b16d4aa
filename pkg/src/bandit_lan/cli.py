"""Command-line front end: parse a run config, dispatch a study, write CSVs.

Every run writes into its own directory named by a hash of the resolved
configuration, then finishes with an atomically written JSON manifest
listing the artifacts. Reals are rendered with 17 significant digits so
two runs with the same seed produce byte-identical CSV bodies.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import build_study, parse_config_text, resolve_settings
from .engine import run_trajectory, write_trajectory_csv
from .errors import ConfigurationError, UniqueOptimalArmViolation
from .montecarlo import (
    TSTAT_HIST_BINS,
    TSTAT_HIST_HI,
    TSTAT_HIST_LO,
    convergence_diag,
    histogram,
    histogram_edges,
    lan_check_records,
    run_study,
    summarize_records,
)
from .selftest import run_selftest

THREADS_ENV_VAR = "BANDIT_LAN_THREADS"


def fmt(value) -> str:
    """CSV cell: 17-significant-digit reals, plain ints, '' for missing."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_records_csv(path: Path, records, policy_label: str, horizon: int) -> None:
    header = [
        "policy", "m1", "T", "rep", "D1", "D2",
        "tau_mu1", "tau_mu2", "tau_delta", "exact_llr", "quad_llr", "residual",
    ]
    rows = []
    for r in records:
        if len(r.pull_counts) != 2:
            raise ConfigurationError("records.csv is defined for two-arm studies")
        rows.append([
            policy_label, r.m1, horizon, r.rep, r.pull_counts[0], r.pull_counts[1],
            r.tau_mu[0], r.tau_mu[1], r.tau_delta, r.exact_llr, r.quad_llr, r.residual,
        ])
    _write_csv(path, header, rows)


def write_summary_csv(path: Path, summary_rows, policy_label: str, horizon: int) -> None:
    header = [
        "policy", "m1", "T", "n_reps", "ks_tau_mu1", "ks_tau_mu2", "ks_tau_delta",
        "n_missing", "median_D2", "q25_D2", "q75_D2",
    ]
    rows = [
        [
            policy_label, s.m1, horizon, s.n_reps, s.ks_tau_mu1, s.ks_tau_mu2,
            s.ks_tau_delta, s.n_missing, s.median_d2, s.q25_d2, s.q75_d2,
        ]
        for s in summary_rows
    ]
    _write_csv(path, header, rows)


def write_histogram_csv(path: Path, counts, lo: float, hi: float, bins: int) -> None:
    edges = histogram_edges(lo, hi, bins)
    header = ["bin_lo", "bin_hi", "count"]
    rows = [[-math.inf, lo, int(counts[0])]]
    for b in range(bins):
        rows.append([edges[b], edges[b + 1], int(counts[b + 1])])
    rows.append([hi, math.inf, int(counts[-1])])
    _write_csv(path, header, rows)


def write_manifest(out_dir: Path, subcommand: str, settings, artifacts: list[str],
                   wall_clock: float, threads: int) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": dict(sorted(settings.canonical.items())),
        "base_seed": settings["study.base_seed"],
        "artifacts": sorted(artifacts),
        "wall_clock_seconds": round(wall_clock, 3),
        "threads": threads,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "bandit_lan": __version__,
        },
    }
    tmp = out_dir / "run_manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2) + "\n")
    os.replace(tmp, out_dir / "run_manifest.json")


def m1_token(m1: float) -> str:
    return format(m1, "g")


def hist_filename(policy_label: str, stat: str, m1: float) -> str:
    return f"hist_{policy_label}_{stat}_m1_{m1_token(m1)}.csv"


def write_cell_histograms(out_dir: Path, records, policy_label: str, horizon: int) -> list[str]:
    """Per-(cell, statistic) histogram CSVs; returns the file names written."""
    names = []
    for i in sorted({r.m1_index for r in records}):
        cell = [r for r in records if r.m1_index == i]
        m1 = cell[0].m1
        stats = {
            "d2": ([float(r.pull_counts[1]) for r in cell], 0.0, float(horizon), horizon),
            "tau_mu1": ([r.tau_mu[0] for r in cell], TSTAT_HIST_LO, TSTAT_HIST_HI, TSTAT_HIST_BINS),
            "tau_mu2": ([r.tau_mu[1] for r in cell], TSTAT_HIST_LO, TSTAT_HIST_HI, TSTAT_HIST_BINS),
            "tau_delta": ([r.tau_delta for r in cell], TSTAT_HIST_LO, TSTAT_HIST_HI, TSTAT_HIST_BINS),
        }
        for stat, (samples, lo, hi, bins) in stats.items():
            present = [s for s in samples if s is not None]
            counts = histogram(present, lo=lo, hi=hi, bins=bins)
            name = hist_filename(policy_label, stat, m1)
            write_histogram_csv(out_dir / name, counts, lo, hi, bins)
            names.append(name)
    return names


def _resolve_threads(arg_threads: int | None) -> int:
    if arg_threads is not None:
        return max(1, arg_threads)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigurationError(f"{THREADS_ENV_VAR} must be an integer") from exc
    return 1


def _load_settings(args) -> "RunSettings":
    raw = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        raw = parse_config_text(path.read_text())
    overrides = {}
    if args.reps is not None:
        overrides["study.replications"] = str(args.reps)
    if args.seed is not None:
        overrides["study.base_seed"] = str(args.seed)
    if args.policy is not None:
        overrides["policy.kind"] = args.policy
    if getattr(args, "T", None) is not None:
        overrides["study.T"] = str(args.T)
    return resolve_settings(raw, overrides)


def _prepare_out_dir(args, settings, subcommand: str) -> Path:
    out_root = Path(args.out)
    out_dir = out_root / settings.config_hash(subcommand)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def cmd_simulate(args) -> int:
    settings = _load_settings(args)
    threads = _resolve_threads(args.threads)
    study = build_study(settings)
    out_dir = _prepare_out_dir(args, settings, "simulate")
    started = time.time()
    records = run_study(study, threads=threads)
    artifacts = ["records.csv", "summary.csv"]
    write_records_csv(out_dir / "records.csv", records, study.policy.label, study.T)
    write_summary_csv(
        out_dir / "summary.csv", summarize_records(records), study.policy.label, study.T
    )
    if args.dump_trajectories:
        dump_dir = out_dir / "trajectories"
        dump_dir.mkdir(exist_ok=True)
        for record in records:
            traj = run_trajectory(study.experiment_for(record.m1_index, record.rep))
            name = f"traj_m1_{m1_token(record.m1)}_rep_{record.rep}.csv"
            write_trajectory_csv(traj, dump_dir / name)
            artifacts.append(f"trajectories/{name}")
    write_manifest(out_dir, "simulate", settings, artifacts,
                   time.time() - started, threads)
    print(out_dir)
    return 0


def cmd_lan_check(args) -> int:
    settings = _load_settings(args)
    threads = _resolve_threads(args.threads)
    study = build_study(settings)
    if study.h is None:
        study = replace(study, h=(1.0,) * study.arms[0].p)
    ladder = list(settings["lan.t_ladder"])
    out_dir = _prepare_out_dir(args, settings, "lan-check")
    started = time.time()
    rows = lan_check_records(study, ladder, threads=threads)
    p = study.arms[0].p
    header = ["policy", "m1", "T", "rep", "seed", "exact_llr", "quad_llr", "residual"]
    header += [f"delta_{j + 1}" for j in range(p)]
    header += [f"info_{l + 1}_{m + 1}" for l in range(p) for m in range(p)]
    body = [
        [study.policy.label, r.m1, r.T, r.rep, r.seed, r.exact_llr, r.quad_llr, r.residual]
        + list(r.delta) + list(r.info)
        for r in rows
    ]
    _write_csv(out_dir / "lan_check.csv", header, body)
    write_manifest(out_dir, "lan-check", settings, ["lan_check.csv"],
                   time.time() - started, threads)
    print(out_dir)
    return 0


def cmd_reproduce_fig(args) -> int:
    settings = _load_settings(args)
    threads = _resolve_threads(args.threads)
    study = build_study(settings)
    out_dir = _prepare_out_dir(args, settings, "reproduce-fig")
    started = time.time()
    records = run_study(study, threads=threads)
    artifacts = ["records.csv", "summary.csv"]
    write_records_csv(out_dir / "records.csv", records, study.policy.label, study.T)
    write_summary_csv(
        out_dir / "summary.csv", summarize_records(records), study.policy.label, study.T
    )
    artifacts += write_cell_histograms(out_dir, records, study.policy.label, study.T)
    write_manifest(out_dir, "reproduce-fig", settings, artifacts,
                   time.time() - started, threads)
    print(out_dir)
    return 0


def cmd_convergence(args) -> int:
    settings = _load_settings(args)
    threads = _resolve_threads(args.threads)
    delta = settings.get("convergence.delta")
    m1_override = None
    if delta is not None:
        m1_override = (delta * math.sqrt(settings["study.T"]),)
    study = build_study(settings, m1_override=m1_override)
    if len(study.m1_grid) != 1:
        study = build_study(settings, m1_override=(study.m1_grid[0],))
    checkpoints = settings.get("convergence.checkpoints") or (study.T,)
    out_dir = _prepare_out_dir(args, settings, "convergence")
    started = time.time()
    rows = convergence_diag(study, list(checkpoints))
    header = ["policy", "checkpoint", "arm", "statistic", "median", "q25", "q75", "reference"]
    body = [
        [study.policy.label, r.checkpoint, r.arm, r.statistic, r.median, r.q25, r.q75, r.reference]
        for r in rows
    ]
    _write_csv(out_dir / "convergence.csv", header, body)
    write_manifest(out_dir, "convergence", settings, ["convergence.csv"],
                   time.time() - started, threads)
    print(out_dir)
    return 0


def cmd_selftest(args) -> int:
    del args
    return run_selftest(verbose=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandit-lan",
        description="Bandit experiment simulator with likelihood-expansion diagnostics",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    handlers = {
        "simulate": (cmd_simulate, "run a replication study and write records/summary CSVs"),
        "lan-check": (cmd_lan_check, "expansion residuals across a ladder of horizons"),
        "reproduce-fig": (cmd_reproduce_fig, "histogram grid over the default m1 values"),
        "convergence": (cmd_convergence, "scaled pull-count table at checkpoints"),
        "selftest": (cmd_selftest, "run the built-in oracle suite"),
    }
    for name, (handler, help_text) in handlers.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", default=None, help="path to a key=value config file")
        sp.add_argument("--out", default="out", help="output root directory")
        sp.add_argument("--reps", type=int, default=None, help="override study.replications")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker processes (default: ${THREADS_ENV_VAR} or 1)")
        sp.add_argument("--policy", default=None,
                        choices=["thompson", "ucb1", "rct", "clipped"],
                        help="override policy.kind")
        sp.add_argument("--seed", type=int, default=None, help="override study.base_seed")
        sp.add_argument("--T", type=int, default=None, help="override study.T")
        sp.add_argument("--dump-trajectories", action="store_true",
                        help="also write one t,action,reward CSV per replication (large)")
        sp.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; usage errors are
        # configuration errors for our purposes
        return 0 if exc.code == 0 else 1
    try:
        return args.handler(args)
    except (ConfigurationError, UniqueOptimalArmViolation) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal assertion
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
