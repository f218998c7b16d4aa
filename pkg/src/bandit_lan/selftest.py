"""Built-in oracle suite: cross-checks the closed forms against slow methods.

Three independent checks: finite-difference gradients of the log densities
against the closed-form scores, numerical quadrature of the squared score
against the closed-form Fisher information, and the exact additivity of the
per-arm log-likelihood-ratio decomposition on simulated trajectories.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .arms import GaussianArm, LogisticArm
from .engine import ExperimentConfig, run_trajectory
from .lan import RateRegime, exact_log_lr, localize, per_arm_lambda, rate_matrix
from .policies import Clipped, RCT, ThompsonGaussian, UCB1
from .arms import location_arms


def check_finite_difference_scores(tol: float = 1e-5) -> float:
    """Max deviation between closed-form scores and centered differences."""
    step = 1e-6
    worst = 0.0
    arms = (
        GaussianArm(arm_index=0, p=2, mean_component=0, sigma2=1.0),
        GaussianArm(arm_index=0, p=2, mean_component=0, sigma2=2.5),
        LogisticArm(arm_index=0, p=2, mean_component=0),
    )
    for arm in arms:
        sd = math.sqrt(getattr(arm, "sigma2", 1.0))
        for mu in (-1.0, 0.0, 0.5, 2.0):
            theta = np.array([mu, 0.0])
            up = np.array([mu + step, 0.0])
            dn = np.array([mu - step, 0.0])
            for z in np.linspace(mu - 4 * sd, mu + 4 * sd, 21):
                fd = (arm.log_density(up, z) - arm.log_density(dn, z)) / (2 * step)
                worst = max(worst, abs(arm.score(theta, z)[0] - fd))
    if worst > tol:
        raise AssertionError(f"finite-difference score check failed: dev={worst:.3e}")
    return worst


def check_fisher_quadrature(tol: float = 1e-3) -> float:
    """Max deviation between quadrature E[score^2] and the closed forms."""
    worst = 0.0
    arms = (
        GaussianArm(arm_index=0, p=2, mean_component=0, sigma2=2.0),
        LogisticArm(arm_index=0, p=2, mean_component=0),
    )
    for arm in arms:
        theta = np.array([0.3, 0.0])
        moment, _ = integrate.quad(
            lambda z: arm.score(theta, z)[0] ** 2 * math.exp(arm.log_density(theta, z)),
            -60,
            60,
            limit=300,
            epsabs=1e-10,
        )
        worst = max(worst, abs(moment - arm.fisher(theta)[0, 0]))
    if worst > tol:
        raise AssertionError(f"fisher quadrature check failed: dev={worst:.3e}")
    return worst


def check_decomposition_identity(tol: float = 1e-10) -> float:
    """Largest relative gap between the exact log-LR and its per-arm split."""
    arms = location_arms("logistic_unit_var", 2)
    theta = np.array([2.0 / math.sqrt(500.0), 0.0])
    h = np.array([1.0, 1.0])
    policies = [ThompsonGaussian(2), UCB1(2), RCT([0.5, 0.5]), Clipped(ThompsonGaussian(2), 0.1)]
    worst = 0.0
    for seed in range(12):
        policy = policies[seed % len(policies)]
        cfg = ExperimentConfig(T=300, theta=theta, arms=arms, policy=policy, seed=seed)
        traj = run_trajectory(cfg)
        for regime in (RateRegime.CASE_B, RateRegime.CASE_B_STAR):
            rates = rate_matrix(theta, arms, cfg.T, regime)
            exact = exact_log_lr(traj, theta, localize(theta, h, rates), arms)
            parts = sum(
                per_arm_lambda(traj, theta, arms, k, rates.a(k) * (h / rates.diag), rates)
                for k in range(2)
            )
            worst = max(worst, abs(exact - parts) / max(1.0, abs(exact)))
    if worst > tol:
        raise AssertionError(f"decomposition identity check failed: relerr={worst:.3e}")
    return worst


def run_selftest(verbose: bool = True) -> int:
    """Run all oracle checks; returns 0 on success, 2 on failure."""
    checks = (
        ("finite-difference scores", check_finite_difference_scores, "1e-5"),
        ("fisher quadrature", check_fisher_quadrature, "1e-3"),
        ("decomposition identity", check_decomposition_identity, "1e-10"),
    )
    failed = False
    for name, check, tol in checks:
        try:
            dev = check()
            if verbose:
                print(f"[ok]   {name}: max deviation {dev:.3e} (tol {tol})")
        except AssertionError as exc:
            failed = True
            if verbose:
                print(f"[FAIL] {name}: {exc}")
    return 2 if failed else 0
