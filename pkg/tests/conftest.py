"""Session-scoped fixtures shared by the heavier test modules.

The studies here are the expensive simulation grids; they run once per
session and several test modules read them. The base seed is the package
default and is fixed here, not tuned per test.
"""

import math

import pytest

from bandit_lan import (
    RCT,
    RateRegime,
    StudyConfig,
    ThompsonGaussian,
    UCB1,
    convergence_diag,
    location_arms,
    run_study,
    summarize_records,
)

ACCEPTANCE_SEED = 123456789  # the package-default base seed
DESK_REPS = 10_000
WORKERS = 2


@pytest.fixture(scope="session")
def thompson_grid_records():
    """Thompson on logistic rewards, T=500, the four-offset grid."""
    cfg = StudyConfig(
        T=500,
        arms=location_arms("logistic_unit_var", 2),
        policy=ThompsonGaussian(2),
        m1_grid=(2.0, 10.0, 50.0, 75.0),
        replications=DESK_REPS,
        base_seed=ACCEPTANCE_SEED,
        regime=RateRegime.CASE_B,
    )
    return run_study(cfg, threads=WORKERS)


@pytest.fixture(scope="session")
def thompson_grid_summary(thompson_grid_records):
    return {row.m1: row for row in summarize_records(thompson_grid_records)}


@pytest.fixture(scope="session")
def ucb1_grid_summary():
    """UCB1 on logistic rewards at the two large offsets, same seeds."""
    cfg = StudyConfig(
        T=500,
        arms=location_arms("logistic_unit_var", 2),
        policy=UCB1(2),
        m1_grid=(50.0, 75.0),
        replications=DESK_REPS,
        base_seed=ACCEPTANCE_SEED,
        regime=RateRegime.CASE_B,
    )
    return {row.m1: row for row in summarize_records(run_study(cfg, threads=WORKERS))}


@pytest.fixture(scope="session")
def rct_baseline_summary():
    """Equal-allocation baseline on Gaussian rewards: the CLT sanity cell."""
    cfg = StudyConfig(
        T=500,
        arms=location_arms("gaussian", 2),
        policy=RCT([0.5, 0.5]),
        m1_grid=(2.0,),
        replications=DESK_REPS,
        base_seed=ACCEPTANCE_SEED,
        regime=RateRegime.CASE_B_STAR,
    )
    [row] = summarize_records(run_study(cfg, threads=WORKERS))
    return row


def unit_gap_study(policy):
    """Well-specified Gaussian setup with a fixed unit gap at T = 10^5."""
    horizon = 10**5
    return StudyConfig(
        T=horizon,
        arms=location_arms("gaussian", 2, sigma2=1.0),
        policy=policy,
        m1_grid=(math.sqrt(float(horizon)),),  # mean offset exactly 1
        replications=200,
        base_seed=ACCEPTANCE_SEED,
        regime=RateRegime.CASE_B,
    )


@pytest.fixture(scope="session")
def thompson_unit_gap_convergence():
    cfg = unit_gap_study(ThompsonGaussian(2))
    return convergence_diag(cfg, [cfg.T])


@pytest.fixture(scope="session")
def ucb1_unit_gap_convergence():
    cfg = unit_gap_study(UCB1(2))
    return convergence_diag(cfg, [cfg.T])
