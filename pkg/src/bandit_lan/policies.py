"""Sampling policies: action distributions driven by the observed history.

A policy maps the running pull counts, reward sums, and round index to a
probability vector over arms. No policy method accepts the model parameter,
so the conditional action probabilities cannot depend on it by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc; absolute error well below 1e-12."""
    return 0.5 * math.erfc(-x / _SQRT2)


def pick_action(probabilities, u: float) -> int:
    """Index of the arm selected by uniform ``u`` under the cumulative rule.

    Returns the first k with cumsum(probabilities)[k] > u, matching
    ``np.searchsorted(cumsum, u, side="right")`` exactly, so scalar and
    vectorized sampling paths agree bit for bit.
    """
    c = 0.0
    last = len(probabilities) - 1
    for k, prob in enumerate(probabilities):
        c += prob
        if u < c:
            return k
    return last


@dataclass
class PolicyState:
    """Running sufficient statistics for one trajectory.

    Mutable and single-owner: one state per trajectory, never shared.
    Plain Python lists keep the per-round update cheap.
    """

    pulls: list[int]
    reward_sums: list[float]
    t: int = 0

    @classmethod
    def fresh(cls, n_arms: int) -> "PolicyState":
        return cls(pulls=[0] * n_arms, reward_sums=[0.0] * n_arms, t=0)

    @property
    def n_arms(self) -> int:
        return len(self.pulls)

    def update(self, action: int, reward: float) -> "PolicyState":
        """Record one (action, reward) pair; returns self for chaining."""
        if not 0 <= action < len(self.pulls):
            raise ValueError(f"action {action} out of range [0, {len(self.pulls)})")
        self.pulls[action] += 1
        self.reward_sums[action] += float(reward)
        self.t += 1
        return self


class Policy:
    """Base class; subclasses implement ``action_probabilities``."""

    n_arms: int
    label: str

    def action_probabilities(self, state: PolicyState) -> np.ndarray:
        raise NotImplementedError

    def draw_action(self, state: PolicyState, rng: np.random.Generator) -> int:
        """Sample one arm; the default consumes exactly one uniform."""
        return pick_action(self.action_probabilities(state), rng.random())

    def _check_state(self, state: PolicyState) -> None:
        if state.n_arms != self.n_arms:
            raise ConfigurationError(
                f"state has {state.n_arms} arms, policy expects {self.n_arms}"
            )


class RCT(Policy):
    """Fixed, history-independent sampling weights."""

    def __init__(self, weights, *, allow_degenerate: bool = False):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) < 2:
            raise ConfigurationError("rct weights must be a vector of length >= 2")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ConfigurationError(f"rct weights must sum to 1, got {w.sum()!r}")
        if not allow_degenerate and not np.all(w > 0.0):
            raise ConfigurationError("rct weights must be strictly positive")
        self.weights = w
        self.n_arms = len(w)
        self.label = "rct"

    def action_probabilities(self, state: PolicyState) -> np.ndarray:
        self._check_state(state)
        return self.weights.copy()


class ThompsonGaussian(Policy):
    """Thompson sampling with a conjugate Gaussian prior and assumed variance.

    Each arm's posterior is N(m_k, v_k) with precision
    1/prior_var + D_k/assumed_var and mean (R_k/assumed_var) * v_k; with
    prior_var = assumed_var = 1 this is mean R_k/(D_k+1), variance
    1/(D_k+1). Rewards need not actually be Gaussian; the policy only ever
    sees the history.

    For two arms the selection probability has the closed form
    Phi((m_2 - m_1) / sqrt(v_1 + v_2)) and the draw spends one uniform.
    For more arms only posterior-draw argmax sampling is exact;
    probabilities are available as Monte Carlo estimates on request.
    """

    def __init__(self, n_arms: int, prior_var: float = 1.0, assumed_var: float = 1.0):
        if n_arms < 2:
            raise ConfigurationError("thompson needs at least two arms")
        if not prior_var > 0 or not assumed_var > 0:
            raise ConfigurationError("prior_var and assumed_var must be positive")
        self.n_arms = n_arms
        self.prior_var = float(prior_var)
        self.assumed_var = float(assumed_var)
        self.label = "thompson"

    def posterior_params(self, state: PolicyState) -> tuple[list[float], list[float]]:
        """Per-arm posterior means and variances given the history."""
        means = []
        variances = []
        for k in range(self.n_arms):
            precision = 1.0 / self.prior_var + state.pulls[k] / self.assumed_var
            v = 1.0 / precision
            means.append((state.reward_sums[k] / self.assumed_var) * v)
            variances.append(v)
        return means, variances

    def _prob_second_arm(self, state: PolicyState) -> float:
        means, variances = self.posterior_params(state)
        gap = means[1] - means[0]
        return normal_cdf(gap / math.sqrt(variances[0] + variances[1]))

    def action_probabilities(self, state: PolicyState) -> np.ndarray:
        self._check_state(state)
        if self.n_arms != 2:
            raise ConfigurationError(
                "exact thompson probabilities are only available for two arms; "
                "use estimate_action_probabilities"
            )
        p2 = self._prob_second_arm(state)
        return np.array([1.0 - p2, p2])

    def estimate_action_probabilities(
        self, state: PolicyState, rng: np.random.Generator, n_draws: int = 10_000
    ) -> np.ndarray:
        """Monte Carlo estimate of the selection probabilities (any K)."""
        self._check_state(state)
        means, variances = self.posterior_params(state)
        draws = np.asarray(means) + np.sqrt(variances) * rng.standard_normal(
            (n_draws, self.n_arms)
        )
        winners = np.argmax(draws, axis=1)
        return np.bincount(winners, minlength=self.n_arms) / n_draws

    def draw_action(self, state: PolicyState, rng: np.random.Generator) -> int:
        self._check_state(state)
        if self.n_arms == 2:
            p2 = self._prob_second_arm(state)
            # One uniform; same cumulative rule as pick_action([1-p2, p2], u).
            return 0 if rng.random() < 1.0 - p2 else 1
        means, variances = self.posterior_params(state)
        best, best_val = 0, -math.inf
        for k in range(self.n_arms):
            val = means[k] + math.sqrt(variances[k]) * rng.standard_normal()
            if val > best_val:
                best, best_val = k, val
        return best


class UCB1(Policy):
    """Deterministic index policy: sample mean plus exploration bonus.

    Rounds 0..K-1 pull arms 0..K-1 in order to initialize every count;
    afterwards the arm maximizing R_k/D_k + sqrt(2 log(t+1) / D_k) is
    chosen, ties broken toward the lowest arm index.
    """

    def __init__(self, n_arms: int):
        if n_arms < 2:
            raise ConfigurationError("ucb1 needs at least two arms")
        self.n_arms = n_arms
        self.label = "ucb1"

    def _choose(self, state: PolicyState) -> int:
        # Bootstrap: pull the lowest-index arm with no data. On histories the
        # policy generated itself this is exactly "round t pulls arm t" for
        # the first K rounds, and it keeps the index well defined on replayed
        # histories produced by other policies.
        for k in range(self.n_arms):
            if state.pulls[k] == 0:
                return k
        log_term = 2.0 * math.log(state.t + 1.0)
        best, best_val = 0, -math.inf
        for k in range(self.n_arms):
            d = state.pulls[k]
            val = state.reward_sums[k] / d + math.sqrt(log_term / d)
            if val > best_val:
                best, best_val = k, val
        return best

    def action_probabilities(self, state: PolicyState) -> np.ndarray:
        self._check_state(state)
        out = np.zeros(self.n_arms)
        out[self._choose(state)] = 1.0
        return out


class Clipped(Policy):
    """Wraps a policy so every probability stays inside [eps, 1-(K-1)eps]."""

    def __init__(self, inner: Policy, epsilon: float):
        n = inner.n_arms
        if not 0.0 < epsilon < 1.0 / n:
            raise ConfigurationError(f"epsilon must lie in (0, 1/{n})")
        self.inner = inner
        self.epsilon = float(epsilon)
        self.n_arms = n
        self.label = f"clipped_{inner.label}"

    def action_probabilities(self, state: PolicyState) -> np.ndarray:
        probs = self.inner.action_probabilities(state)
        lo = self.epsilon
        hi = 1.0 - (self.n_arms - 1) * self.epsilon
        return _project_box_simplex(probs, lo, hi)


def _project_box_simplex(probs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Clip to [lo, hi], then spread the mass residual over the slack.

    Redistribution is proportional to each coordinate's remaining slack, so
    the result stays inside the box and sums to one. Feasibility needs
    K*lo <= 1 <= K*hi, which the Clipped constructor guarantees.
    """
    q = np.clip(probs, lo, hi)
    excess = float(q.sum()) - 1.0
    if excess > 0.0:
        slack = q - lo
        total = float(slack.sum())
        if total > 0.0:
            q = q - excess * slack / total
    elif excess < 0.0:
        slack = hi - q
        total = float(slack.sum())
        if total > 0.0:
            q = q + (-excess) * slack / total
    return np.clip(q, lo, hi)
