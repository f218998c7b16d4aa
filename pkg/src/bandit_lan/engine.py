"""Single-trajectory bandit simulator with split, reproducible random streams.

The master seed is split with the documented integer recipe into one action
stream and one reward stream, so policy randomness and reward randomness are
independently reproducible. Rewards are drawn by inverse CDF, one uniform
per round, which makes the vectorized fast path for fixed-weight policies
bit-identical to the generic step loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arms import ArmModel
from .errors import ConfigurationError
from .policies import Policy, PolicyState, RCT
from .rng import derive_seed, stream

# Stream tags mixed with the trajectory seed (see README for the recipe).
ACTION_STREAM_TAG = 1
REWARD_STREAM_TAG = 2


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything needed to run one trajectory deterministically."""

    T: int
    theta: np.ndarray
    arms: tuple[ArmModel, ...]
    policy: Policy
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "arms", tuple(self.arms))
        k = len(self.arms)
        if k < 2:
            raise ConfigurationError("a bandit experiment needs K > 1 arms")
        if self.T < k:
            raise ConfigurationError(f"T={self.T} must be at least K={k}")
        p = self.arms[0].p
        if p < 2:
            raise ConfigurationError("bandit configurations need p >= 2 parameters")
        for pos, arm in enumerate(self.arms):
            if arm.arm_index != pos:
                raise ConfigurationError(
                    f"arm at position {pos} declares arm_index {arm.arm_index}"
                )
            if arm.p != p:
                raise ConfigurationError("all arms must share the same parameter dimension")
        if self.theta.shape != (p,):
            raise ConfigurationError(f"theta must have shape ({p},)")
        if not np.all(np.isfinite(self.theta)):
            raise ConfigurationError("theta components must be finite")
        if self.policy.n_arms != k:
            raise ConfigurationError("policy arm count does not match the experiment")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def p(self) -> int:
        return self.arms[0].p


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One realized bandit run; immutable output, safe to pass between workers."""

    actions: np.ndarray
    rewards: np.ndarray
    pull_counts: np.ndarray
    reward_sums: np.ndarray

    @property
    def T(self) -> int:
        return len(self.actions)

    @property
    def K(self) -> int:
        return len(self.pull_counts)


def run_trajectory(config: ExperimentConfig, *, _force_loop: bool = False) -> Trajectory:
    """Simulate one trajectory; a pure function of ``config``.

    Each round consumes one uniform from the action stream (inside the
    policy's draw) and one uniform from the reward stream (through the
    chosen arm's inverse CDF). Fixed-weight policies skip the Python loop
    entirely; the result is bit-identical either way.
    """
    T, K = config.T, config.K
    action_rng = stream(derive_seed(config.seed, ACTION_STREAM_TAG))
    reward_rng = stream(derive_seed(config.seed, REWARD_STREAM_TAG))

    # Potential outcomes, one shared uniform per round: outcome[k, t] is the
    # reward arm k would yield at round t. Only the chosen entry is revealed,
    # so coupling the arms through u_t leaves the observed law unchanged.
    u_rewards = reward_rng.random(T)
    outcomes = np.stack([arm.quantile(config.theta, u_rewards) for arm in config.arms])

    if isinstance(config.policy, RCT) and not _force_loop:
        cum = np.cumsum(config.policy.weights)
        idx = np.searchsorted(cum, action_rng.random(T), side="right")
        actions = np.minimum(idx, K - 1).astype(np.int64)
    else:
        rows = [row.tolist() for row in outcomes]
        state = PolicyState.fresh(K)
        policy = config.policy
        chosen = []
        for t in range(T):
            a = policy.draw_action(state, action_rng)
            state.update(a, rows[a][t])
            chosen.append(a)
        actions = np.asarray(chosen, dtype=np.int64)

    rewards = outcomes[actions, np.arange(T)]
    pull_counts = np.bincount(actions, minlength=K).astype(np.int64)
    reward_sums = np.bincount(actions, weights=rewards, minlength=K)
    return Trajectory(actions, rewards, pull_counts, reward_sums)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Dump one trajectory as CSV with columns t, action, reward.

    Rounds and arm labels are 1-based in the file; rewards carry 17
    significant digits for byte-stable round-trips.
    """
    lines = ["t,action,reward"]
    lines.extend(
        f"{t + 1},{int(a) + 1},{format(float(y), '.17g')}"
        for t, (a, y) in enumerate(zip(traj.actions, traj.rewards))
    )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def replay_check(traj: Trajectory, config: ExperimentConfig) -> bool:
    """Recompute running statistics from the raw arrays; True iff bit-equal."""
    if traj.T != config.T or traj.K != config.K:
        return False
    if len(traj.rewards) != traj.T:
        return False
    pull_counts = np.bincount(traj.actions, minlength=traj.K).astype(np.int64)
    reward_sums = np.bincount(traj.actions, weights=traj.rewards, minlength=traj.K)
    return bool(
        np.array_equal(pull_counts, traj.pull_counts)
        and np.array_equal(reward_sums, traj.reward_sums)
    )
