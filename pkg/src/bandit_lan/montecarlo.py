"""Replication harness: seeded trajectory grids and their summary statistics.

Runs many trajectories over a grid of local mean offsets, computes
studentized statistics and expansion residuals per replication, and
aggregates Kolmogorov-Smirnov distances, histograms, and pull-rate
convergence diagnostics. Replication seeds are derived per (cell,
replication) pair, so outputs are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .arms import ArmModel, GaussianArm
from .engine import ExperimentConfig, Trajectory, run_trajectory
from .errors import ConfigurationError
from .lan import RateRegime, expansion_report
from .policies import Policy, RCT
from .rng import derive_seed

# Default histogram layout for studentized statistics.
TSTAT_HIST_LO = -6.0
TSTAT_HIST_HI = 6.0
TSTAT_HIST_BINS = 121


def t_stat_arm(traj: Trajectory, k: int, mu_k: float) -> float | None:
    """Studentized sample mean of arm k: (R_k/D_k - mu_k) * sqrt(D_k).

    None when the arm was never pulled; missing is a value, not an error.
    """
    d = int(traj.pull_counts[k])
    if d == 0:
        return None
    return (float(traj.reward_sums[k]) / d - mu_k) / math.sqrt(1.0 / d)


def t_stat_diff(traj: Trajectory, delta: float) -> float | None:
    """Studentized mean difference between arms 1 and 2 (two-arm runs only)."""
    if traj.K != 2:
        raise ConfigurationError("t_stat_diff is defined for two-arm experiments")
    d1, d2 = int(traj.pull_counts[0]), int(traj.pull_counts[1])
    if d1 == 0 or d2 == 0:
        return None
    gap = float(traj.reward_sums[0]) / d1 - float(traj.reward_sums[1]) / d2
    return (gap - delta) / math.sqrt(1.0 / d1 + 1.0 / d2)


@dataclass(frozen=True)
class StudyConfig:
    """A replication study over a grid of local mean offsets.

    Cell i uses theta with arm 1's mean set to m1_grid[i] / sqrt(T) and all
    other components zero. Replication r of cell i runs with seed
    derive_seed(base_seed, i, r). When ``h`` is set, each replication also
    carries the exact and quadratic log-likelihood ratios at that
    perturbation; ``true_c`` optionally fixes the linear-rate information
    constants (default: empirical pull fractions).
    """

    T: int
    arms: tuple[ArmModel, ...]
    policy: Policy
    m1_grid: tuple[float, ...]
    replications: int
    base_seed: int
    regime: RateRegime
    h: tuple[float, ...] | None = None
    true_c: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(self.arms))
        object.__setattr__(self, "m1_grid", tuple(float(v) for v in self.m1_grid))
        if self.h is not None:
            object.__setattr__(self, "h", tuple(float(v) for v in self.h))
        if self.true_c is not None:
            object.__setattr__(self, "true_c", tuple(float(v) for v in self.true_c))
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if len(self.m1_grid) == 0:
            raise ConfigurationError("m1_grid must be nonempty")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigurationError("base_seed must be an unsigned 64-bit integer")
        if self.arms[0].mean_component is None:
            raise ConfigurationError("arm 1 must read its mean from the parameter")

    def theta_for(self, m1: float) -> np.ndarray:
        """Parameter for one cell: arm 1's mean is m1 / sqrt(T), rest zero."""
        theta = np.zeros(self.arms[0].p)
        theta[self.arms[0].mean_component] = m1 / math.sqrt(self.T)
        return theta

    def experiment_for(self, m1_index: int, rep: int) -> ExperimentConfig:
        return ExperimentConfig(
            T=self.T,
            theta=self.theta_for(self.m1_grid[m1_index]),
            arms=self.arms,
            policy=self.policy,
            seed=derive_seed(self.base_seed, m1_index, rep),
        )


@dataclass(frozen=True)
class ReplicationRecord:
    """Per-replication outputs of a study cell."""

    m1_index: int
    m1: float
    rep: int
    seed: int
    pull_counts: tuple[int, ...]
    tau_mu: tuple[float | None, ...]
    tau_delta: float | None
    exact_llr: float | None = None
    quad_llr: float | None = None
    residual: float | None = None


def _run_block(config: StudyConfig, m1_index: int, start: int, stop: int) -> list[ReplicationRecord]:
    """Run replications [start, stop) of one cell; picklable worker unit."""
    m1 = config.m1_grid[m1_index]
    theta = config.theta_for(m1)
    mus = [arm.mean(theta) for arm in config.arms]
    records = []
    for rep in range(start, stop):
        exp = config.experiment_for(m1_index, rep)
        traj = run_trajectory(exp)
        tau_mu = tuple(t_stat_arm(traj, k, mus[k]) for k in range(traj.K))
        tau_delta = t_stat_diff(traj, mus[0] - mus[1]) if traj.K == 2 else None
        exact = quad = residual = None
        if config.h is not None:
            report = expansion_report(
                traj, theta, config.arms, config.h, config.regime, C=config.true_c
            )
            exact, quad, residual = report.exact_llr, report.quad_llr, report.residual
        records.append(
            ReplicationRecord(
                m1_index=m1_index,
                m1=m1,
                rep=rep,
                seed=exp.seed,
                pull_counts=tuple(int(d) for d in traj.pull_counts),
                tau_mu=tau_mu,
                tau_delta=tau_delta,
                exact_llr=exact,
                quad_llr=quad,
                residual=residual,
            )
        )
    return records


def run_study(config: StudyConfig, threads: int = 1) -> list[ReplicationRecord]:
    """All replications of all cells, sorted by (cell, replication).

    Seeds are derived per (cell, replication), so the output is bit-identical
    for any ``threads`` value; workers only change the execution schedule.
    """
    blocks = []
    for i in range(len(config.m1_grid)):
        if threads <= 1:
            blocks.append((i, 0, config.replications))
        else:
            step = max(1, math.ceil(config.replications / (threads * 4)))
            for start in range(0, config.replications, step):
                blocks.append((i, start, min(start + step, config.replications)))

    records: list[ReplicationRecord] = []
    if threads <= 1:
        for i, start, stop in blocks:
            records.extend(_run_block(config, i, start, stop))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_block, config, *block) for block in blocks]
            for future in futures:
                records.extend(future.result())
    records.sort(key=lambda r: (r.m1_index, r.rep))
    return records


@dataclass(frozen=True)
class LanCheckRow:
    """Expansion ingredients for one replication at one horizon."""

    m1: float
    T: int
    rep: int
    seed: int
    exact_llr: float
    quad_llr: float
    residual: float
    delta: tuple[float, ...]
    info: tuple[float, ...]  # row-major flattening


def _lan_block(config: StudyConfig, m1_index: int, start: int, stop: int) -> list[LanCheckRow]:
    if config.h is None:
        raise ConfigurationError("lan checks need a perturbation h")
    m1 = config.m1_grid[m1_index]
    theta = config.theta_for(m1)
    rows = []
    for rep in range(start, stop):
        exp = config.experiment_for(m1_index, rep)
        traj = run_trajectory(exp)
        report = expansion_report(
            traj, theta, config.arms, config.h, config.regime, C=config.true_c
        )
        rows.append(
            LanCheckRow(
                m1=m1,
                T=config.T,
                rep=rep,
                seed=exp.seed,
                exact_llr=report.exact_llr,
                quad_llr=report.quad_llr,
                residual=report.residual,
                delta=tuple(float(v) for v in report.central_sequence),
                info=tuple(float(v) for v in report.info_matrix.ravel()),
            )
        )
    return rows


def lan_check_records(
    config: StudyConfig, t_ladder: list[int], threads: int = 1
) -> list[LanCheckRow]:
    """Expansion rows for every (horizon, cell, replication) combination.

    The base seed is mixed with the horizon's position in the ladder, so
    each horizon gets its own independent replication set.
    """
    rows: list[LanCheckRow] = []
    for t_index, horizon in enumerate(t_ladder):
        cfg = replace(
            config,
            T=horizon,
            base_seed=derive_seed(config.base_seed, 1_000_000 + t_index),
        )
        blocks = []
        for i in range(len(cfg.m1_grid)):
            if threads <= 1:
                blocks.append((i, 0, cfg.replications))
            else:
                step = max(1, math.ceil(cfg.replications / (threads * 4)))
                for start in range(0, cfg.replications, step):
                    blocks.append((i, start, min(start + step, cfg.replications)))
        # blocks are submitted in (cell, rep) order and futures are consumed
        # in submission order, so the concatenation is already sorted
        if threads <= 1:
            for i, start, stop in blocks:
                rows.extend(_lan_block(cfg, i, start, stop))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(_lan_block, cfg, *block) for block in blocks]
                for future in futures:
                    rows.extend(future.result())
    return rows


def ks_distance(samples) -> float:
    """Exact sup-distance between the empirical CDF and the standard normal.

    None/NaN entries are excluded (they are missing values, tracked
    separately by callers); an input with nothing left is an error.
    """
    values = np.asarray(
        [s for s in samples if s is not None], dtype=float
    )
    values = values[~np.isnan(values)]
    n = len(values)
    if n == 0:
        raise ConfigurationError("ks_distance needs at least one non-missing sample")
    values.sort()
    cdf = ndtr(values)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def histogram(samples, lo: float, hi: float, bins: int) -> np.ndarray:
    """Equal-width bin counts plus underflow/overflow cells.

    Returns ``bins + 2`` counts: [underflow, interior..., overflow].
    Interior bins are left-closed; a sample exactly at ``lo`` lands in the
    first interior bin, a sample at ``hi`` in the overflow bin.
    """
    if not lo < hi:
        raise ConfigurationError("histogram needs lo < hi")
    if bins < 1:
        raise ConfigurationError("histogram needs at least one bin")
    values = np.asarray(list(samples), dtype=float)
    if len(values) and not np.all(np.isfinite(values)):
        raise ConfigurationError("histogram input must be finite; drop missing first")
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.searchsorted(edges, values, side="right")
    return np.bincount(idx, minlength=bins + 2)


def histogram_edges(lo: float, hi: float, bins: int) -> np.ndarray:
    """Interior bin edges matching ``histogram``'s layout."""
    return np.linspace(lo, hi, bins + 1)


@dataclass(frozen=True)
class SummaryRow:
    """Per-cell aggregate of a two-arm study."""

    m1: float
    n_reps: int
    ks_tau_mu1: float | None
    ks_tau_mu2: float | None
    ks_tau_delta: float | None
    n_missing: int
    median_d2: float
    q25_d2: float
    q75_d2: float


def _ks_or_none(samples) -> float | None:
    present = [s for s in samples if s is not None]
    return ks_distance(present) if present else None


def summarize_records(records: list[ReplicationRecord]) -> list[SummaryRow]:
    """One row per cell: KS distances of the t-statistics, missing counts,
    and the suboptimal-arm pull distribution."""
    rows = []
    for i in sorted({r.m1_index for r in records}):
        cell = [r for r in records if r.m1_index == i]
        if any(len(r.pull_counts) != 2 for r in cell):
            raise ConfigurationError("summaries are defined for two-arm studies")
        d2 = np.array([r.pull_counts[1] for r in cell], dtype=float)
        q25, med, q75 = np.percentile(d2, [25, 50, 75])
        rows.append(
            SummaryRow(
                m1=cell[0].m1,
                n_reps=len(cell),
                ks_tau_mu1=_ks_or_none([r.tau_mu[0] for r in cell]),
                ks_tau_mu2=_ks_or_none([r.tau_mu[1] for r in cell]),
                ks_tau_delta=_ks_or_none([r.tau_delta for r in cell]),
                n_missing=sum(1 for r in cell if min(r.pull_counts) == 0),
                median_d2=float(med),
                q25_d2=float(q25),
                q75_d2=float(q75),
            )
        )
    return rows


@dataclass(frozen=True)
class ConvergenceRow:
    """Pull-rate summary for one (checkpoint, arm) pair."""

    checkpoint: int
    arm: int
    statistic: str
    median: float
    q25: float
    q75: float
    reference: float | None


def convergence_diag(config: StudyConfig, checkpoints: list[int]) -> list[ConvergenceRow]:
    """Distribution of scaled pull counts at intermediate horizons.

    Log-rate regime: reports D_k(T') / log(T') for suboptimal arms, with
    the reference constant 2*sigma2/gap^2 when every arm is Gaussian with a
    common known variance. Linear-rate regime: reports D_k(T') / T' for all
    arms, with the policy weight as reference under fixed-weight sampling.
    """
    if len(config.m1_grid) != 1:
        raise ConfigurationError("convergence diagnostics use a single-cell study")
    if any(c < 2 for c in checkpoints):
        raise ConfigurationError("checkpoints must be >= 2")
    if any(b >= a for a, b in zip(checkpoints[1:], checkpoints)):
        raise ConfigurationError("checkpoints must be strictly increasing")
    if checkpoints[-1] > config.T:
        raise ConfigurationError("checkpoints cannot exceed the horizon T")

    theta = config.theta_for(config.m1_grid[0])
    means = [arm.mean(theta) for arm in config.arms]
    best = max(means)
    k_star = means.index(best)
    case_b = config.regime is RateRegime.CASE_B
    arms_to_report = (
        [k for k in range(len(config.arms)) if k != k_star]
        if case_b
        else list(range(len(config.arms)))
    )

    counts = {
        (t_prime, k): [] for t_prime in checkpoints for k in arms_to_report
    }
    for rep in range(config.replications):
        traj = run_trajectory(config.experiment_for(0, rep))
        for k in arms_to_report:
            hits = np.cumsum(traj.actions == k)
            for t_prime in checkpoints:
                counts[(t_prime, k)].append(int(hits[t_prime - 1]))

    gaussian_sigma2 = None
    if all(isinstance(arm, GaussianArm) for arm in config.arms):
        sigmas = {arm.sigma2 for arm in config.arms}
        if len(sigmas) == 1:
            gaussian_sigma2 = sigmas.pop()

    rows = []
    for t_prime in checkpoints:
        for k in arms_to_report:
            scale = math.log(t_prime) if case_b else float(t_prime)
            ratios = np.array(counts[(t_prime, k)], dtype=float) / scale
            q25, med, q75 = np.percentile(ratios, [25, 50, 75])
            reference = None
            if case_b and gaussian_sigma2 is not None:
                gap = best - means[k]
                reference = 2.0 * gaussian_sigma2 / gap**2
            elif not case_b and isinstance(config.policy, RCT):
                reference = float(config.policy.weights[k])
            rows.append(
                ConvergenceRow(
                    checkpoint=t_prime,
                    arm=k + 1,
                    statistic="pulls_per_log_t" if case_b else "pulls_per_t",
                    median=float(med),
                    q25=float(q25),
                    q75=float(q75),
                    reference=reference,
                )
            )
    return rows
