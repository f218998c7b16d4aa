"""Likelihood-ratio expansion diagnostics for adaptive bandit runs.

Builds, for one realized trajectory, every ingredient of the local
quadratic expansion of the log-likelihood ratio: localization rates,
per-arm scaled score and information statistics, the central sequence,
the information matrix, the exact log-likelihood ratio, and the residual
between the exact ratio and its quadratic approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .arms import ArmModel
from .engine import Trajectory
from .errors import ConfigurationError, UniqueOptimalArmViolation


class RateRegime(Enum):
    """Pull-rate regime for the suboptimal arms.

    CASE_B: suboptimal arms accrue pulls at log(T) rate (adaptive policies
    such as Thompson sampling or UCB1 under a fixed gap).
    CASE_B_STAR: every arm accrues pulls at linear rate (fixed-weight or
    clipped policies).
    """

    CASE_B = "case_b"
    CASE_B_STAR = "case_b_star"

    def slow_scale(self, T: int) -> float:
        """s_T: log(T) under CASE_B, T under CASE_B_STAR."""
        if self is RateRegime.CASE_B:
            return math.log(T)
        return float(T)


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """Diagonal localization rates r_j plus the per-arm scaling a_k."""

    diag: np.ndarray
    T: int
    regime: RateRegime
    k_star: int

    @property
    def p(self) -> int:
        return len(self.diag)

    def a(self, k: int) -> float:
        """Scaling for arm k's score sum: sqrt(T) for the optimal arm,
        sqrt(s_T) for the others."""
        if k == self.k_star:
            return math.sqrt(self.T)
        return math.sqrt(self.regime.slow_scale(self.T))


def optimal_arm(theta, arms: tuple[ArmModel, ...]) -> int:
    """Index of the arm with the strictly largest mean reward."""
    means = [arm.mean(theta) for arm in arms]
    best = max(means)
    winners = [k for k, m in enumerate(means) if m == best]
    if len(winners) != 1:
        raise UniqueOptimalArmViolation(
            f"arms {winners} tie for the highest mean reward {best!r}"
        )
    return winners[0]


def rate_matrix(theta, arms: tuple[ArmModel, ...], T: int, regime: RateRegime) -> RateMatrix:
    """Localization rates: sqrt(T) on components the optimal arm depends on,
    sqrt(s_T) on the rest."""
    if T < 2:
        raise ConfigurationError("rate matrices need T >= 2")
    k_star = optimal_arm(theta, arms)
    sqrt_t = math.sqrt(T)
    sqrt_s = math.sqrt(regime.slow_scale(T))
    p = arms[0].p
    diag = np.array(
        [sqrt_t if arms[k_star].depends_on(j) else sqrt_s for j in range(p)]
    )
    return RateMatrix(diag=diag, T=T, regime=regime, k_star=k_star)


def localize(theta, h, rates: RateMatrix) -> np.ndarray:
    """Localized parameter: theta + h / r, componentwise."""
    theta = np.asarray(theta, dtype=float)
    h = np.asarray(h, dtype=float)
    return theta + h / rates.diag


def per_arm_score_stat(
    traj: Trajectory, theta, arms: tuple[ArmModel, ...], k: int, rates: RateMatrix
) -> np.ndarray:
    """Scaled score sum over arm k's pulls: (1/a_k) * sum of score(Y_t)."""
    arm = arms[k]
    out = np.zeros(arm.p)
    if arm.mean_component is None:
        return out
    z = traj.rewards[traj.actions == k]
    if len(z) == 0:
        return out
    total = float(np.sum(arm._centered_score(z - arm.mean(theta))))
    out[arm.mean_component] = total / rates.a(k)
    return out


def per_arm_info_stat(
    traj: Trajectory, theta, arms: tuple[ArmModel, ...], k: int, rates: RateMatrix
) -> np.ndarray:
    """Scaled information: (D_k / a_k^2) * Fisher_k; zero matrix when D_k = 0."""
    scale = float(traj.pull_counts[k]) / rates.a(k) ** 2
    return scale * arms[k].fisher(theta)


def central_sequence(
    per_arm_scores: np.ndarray, theta, arms: tuple[ArmModel, ...], regime: RateRegime
) -> np.ndarray:
    """Combine per-arm score statistics into the central sequence.

    Linear-rate regime: plain sum over arms. Log-rate regime: the optimal
    arm's entry, plus the suboptimal arms' sum on components the optimal
    arm carries no information about (declared structurally, never by
    floating-point comparison).
    """
    scores = np.asarray(per_arm_scores, dtype=float)
    if regime is RateRegime.CASE_B_STAR:
        return scores.sum(axis=0)
    k_star = optimal_arm(theta, arms)
    out = scores[k_star].copy()
    others = np.delete(scores, k_star, axis=0).sum(axis=0)
    for j in range(len(out)):
        if not arms[k_star].depends_on(j):
            out[j] += others[j]
    return out


def info_matrix(
    theta, arms: tuple[ArmModel, ...], C, regime: RateRegime
) -> np.ndarray:
    """Limiting information matrix for the chosen regime.

    Linear-rate regime: sum of C_k * Fisher_k and the pull-rate constants
    ``C`` are required. Log-rate regime: the optimal arm's Fisher matrix,
    with suboptimal arms filling in entries that are structural zeros for
    the optimal arm; ``C`` is ignored.
    """
    p = arms[0].p
    if regime is RateRegime.CASE_B_STAR:
        if C is None:
            raise ConfigurationError(
                "linear-rate information matrix needs pull-rate constants C"
            )
        C = np.asarray(C, dtype=float)
        if C.shape != (len(arms),):
            raise ConfigurationError(f"C must have shape ({len(arms)},)")
        out = np.zeros((p, p))
        for ck, arm in zip(C, arms):
            out += ck * arm.fisher(theta)
        return out
    k_star = optimal_arm(theta, arms)
    out = arms[k_star].fisher(theta).copy()
    mask = np.outer(arms[k_star].dependence_mask(), arms[k_star].dependence_mask())
    others = np.zeros((p, p))
    for k, arm in enumerate(arms):
        if k != k_star:
            others += arm.fisher(theta)
    out[~mask] += others[~mask]
    return out


def exact_log_lr(traj: Trajectory, theta, theta_alt, arms: tuple[ArmModel, ...]) -> float:
    """Exact log-likelihood ratio of the run at theta_alt versus theta.

    Sum over rounds of log f_{A_t}(Y_t | theta_alt) - log f_{A_t}(Y_t | theta);
    the policy factors are identical under both parameters and cancel, so
    they are never computed.
    """
    per_round = np.empty(traj.T)
    for k, arm in enumerate(arms):
        sel = traj.actions == k
        if not np.any(sel):
            continue
        z = traj.rewards[sel]
        per_round[sel] = arm.log_density(theta_alt, z) - arm.log_density(theta, z)
    return float(np.sum(per_round))


def per_arm_lambda(
    traj: Trajectory,
    theta,
    arms: tuple[ArmModel, ...],
    k: int,
    u,
    rates: RateMatrix,
) -> float:
    """Arm k's log-likelihood-ratio contribution at local perturbation u.

    Sum over arm k's pulls of log f_k(Y_t | theta + u / a_k) - log f_k(Y_t | theta).
    """
    theta = np.asarray(theta, dtype=float)
    u = np.asarray(u, dtype=float)
    shifted = theta + u / rates.a(k)
    z = traj.rewards[traj.actions == k]
    if len(z) == 0:
        return 0.0
    arm = arms[k]
    return float(np.sum(arm.log_density(shifted, z) - arm.log_density(theta, z)))


def quadratic_approx(delta, info, h) -> float:
    """Quadratic expansion value: h'delta - (1/2) h'info h."""
    delta = np.asarray(delta, dtype=float)
    info = np.asarray(info, dtype=float)
    h = np.asarray(h, dtype=float)
    return float(h @ delta - 0.5 * h @ info @ h)


@dataclass(frozen=True, eq=False)
class ExpansionReport:
    """All expansion ingredients for one trajectory at one perturbation h."""

    per_arm_scores: np.ndarray
    per_arm_info: np.ndarray
    central_sequence: np.ndarray
    info_matrix: np.ndarray
    exact_llr: float
    quad_llr: float
    residual: float


def expansion_report(
    traj: Trajectory,
    theta,
    arms: tuple[ArmModel, ...],
    h,
    regime: RateRegime,
    C=None,
) -> ExpansionReport:
    """Exact vs quadratic log-likelihood ratio for one trajectory.

    Under the linear-rate regime the information matrix uses the supplied
    pull-rate constants ``C`` when given and the empirical pull fractions
    D_k / T otherwise.
    """
    theta = np.asarray(theta, dtype=float)
    rates = rate_matrix(theta, arms, traj.T, regime)
    theta_local = localize(theta, h, rates)
    scores = np.stack(
        [per_arm_score_stat(traj, theta, arms, k, rates) for k in range(len(arms))]
    )
    infos = np.stack(
        [per_arm_info_stat(traj, theta, arms, k, rates) for k in range(len(arms))]
    )
    delta = central_sequence(scores, theta, arms, regime)
    if regime is RateRegime.CASE_B_STAR and C is None:
        C = traj.pull_counts / traj.T
    info = info_matrix(theta, arms, C, regime)
    exact = exact_log_lr(traj, theta, theta_local, arms)
    quad = quadratic_approx(delta, info, h)
    return ExpansionReport(
        per_arm_scores=scores,
        per_arm_info=infos,
        central_sequence=delta,
        info_matrix=info,
        exact_llr=exact,
        quad_llr=quad,
        residual=exact - quad,
    )
