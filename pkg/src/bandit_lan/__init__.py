"""Simulation laboratory for fixed-gap bandit experiments.

Runs seeded bandit trajectories under adaptive and randomized sampling
policies, computes exact log-likelihood ratios together with their
quadratic (central sequence / information matrix) approximations, and
replicates the finite-sample distribution of studentized statistics over
large seed grids.
"""

from .arms import (
    ArmModel,
    GaussianArm,
    LogisticArm,
    LOGISTIC_SCALE,
    dqm_remainder_stat,
    location_arms,
)
from .engine import ExperimentConfig, Trajectory, replay_check, run_trajectory
from .errors import ConfigurationError, UniqueOptimalArmViolation
from .lan import (
    ExpansionReport,
    RateMatrix,
    RateRegime,
    central_sequence,
    exact_log_lr,
    expansion_report,
    info_matrix,
    localize,
    optimal_arm,
    per_arm_info_stat,
    per_arm_lambda,
    per_arm_score_stat,
    quadratic_approx,
    rate_matrix,
)
from .montecarlo import (
    ReplicationRecord,
    StudyConfig,
    convergence_diag,
    histogram,
    ks_distance,
    run_study,
    summarize_records,
    t_stat_arm,
    t_stat_diff,
)
from .policies import RCT, Clipped, PolicyState, ThompsonGaussian, UCB1
from .rng import derive_seed, splitmix64, stream

__version__ = "0.1.0"

__all__ = [
    "ArmModel",
    "Clipped",
    "ConfigurationError",
    "ExpansionReport",
    "ExperimentConfig",
    "GaussianArm",
    "LOGISTIC_SCALE",
    "LogisticArm",
    "PolicyState",
    "RCT",
    "RateMatrix",
    "RateRegime",
    "ReplicationRecord",
    "StudyConfig",
    "ThompsonGaussian",
    "Trajectory",
    "UCB1",
    "UniqueOptimalArmViolation",
    "central_sequence",
    "convergence_diag",
    "derive_seed",
    "dqm_remainder_stat",
    "exact_log_lr",
    "expansion_report",
    "histogram",
    "info_matrix",
    "ks_distance",
    "localize",
    "location_arms",
    "optimal_arm",
    "per_arm_info_stat",
    "per_arm_lambda",
    "per_arm_score_stat",
    "quadratic_approx",
    "rate_matrix",
    "replay_check",
    "run_study",
    "run_trajectory",
    "splitmix64",
    "stream",
    "summarize_records",
    "t_stat_arm",
    "t_stat_diff",
]
