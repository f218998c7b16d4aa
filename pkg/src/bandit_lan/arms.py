"""Reward families for bandit arms: samplers, densities, scores, Fisher information.

Both bundled families are location models. Each arm reads at most one
component of the parameter vector as its mean, and every other component
leaves the arm's distribution untouched. Score vectors and Fisher matrices
therefore carry exact structural zeros, declared by the component mapping
rather than detected numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError
from .rng import stream

# Scale that makes the logistic variance (scale^2 * pi^2 / 3) equal to one.
LOGISTIC_SCALE = math.sqrt(3.0) / math.pi

# Inverse-CDF guard: Generator.random() can return exactly 0.0.
_MIN_UNIFORM = 2.0 ** -53

FAMILY_GAUSSIAN = "gaussian"
FAMILY_LOGISTIC = "logistic_unit_var"


@dataclass(frozen=True)
class ArmModel:
    """One arm's parametric reward family.

    Immutable and safe to share across workers. ``mean_component`` is the
    index of the parameter component holding this arm's mean; ``None``
    declares a fully known arm whose distribution ignores the parameter
    vector entirely (score identically zero).
    """

    arm_index: int
    p: int
    mean_component: int | None
    fixed_mean: float = 0.0

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ConfigurationError("parameter dimension p must be >= 1")
        if self.mean_component is not None and not 0 <= self.mean_component < self.p:
            raise ConfigurationError(
                f"mean_component {self.mean_component} out of range for p={self.p}"
            )

    # ----- parameter bookkeeping ------------------------------------
    def mean(self, theta) -> float:
        """Expected reward under ``theta``."""
        if self.mean_component is None:
            return self.fixed_mean
        return float(theta[self.mean_component])

    def depends_on(self, j: int) -> bool:
        """Whether the density varies with parameter component ``j``."""
        return self.mean_component == j

    def dependence_mask(self) -> np.ndarray:
        """Boolean vector marking the components the density depends on."""
        mask = np.zeros(self.p, dtype=bool)
        if self.mean_component is not None:
            mask[self.mean_component] = True
        return mask

    # ----- family hooks (centered at the mean) -----------------------
    def _centered_log_density(self, d):
        raise NotImplementedError

    def _centered_score(self, d):
        """d/dmu log f at offset d = z - mean."""
        raise NotImplementedError

    def _standard_quantile(self, u):
        """Quantile of the zero-mean member of the family."""
        raise NotImplementedError

    def _mean_info(self) -> float:
        """Fisher information carried by the mean parameter."""
        raise NotImplementedError

    # ----- operations -------------------------------------------------
    def log_density(self, theta, z):
        """log f(z | theta); vectorized over ``z`` and finite for all real z."""
        return self._centered_log_density(np.asarray(z, dtype=float) - self.mean(theta))

    def score(self, theta, z: float) -> np.ndarray:
        """Gradient of ``log_density`` in theta, with exact structural zeros."""
        out = np.zeros(self.p)
        if self.mean_component is not None:
            out[self.mean_component] = self._centered_score(float(z) - self.mean(theta))
        return out

    def fisher(self, theta) -> np.ndarray:
        """Closed-form Fisher information matrix (p x p, structurally sparse)."""
        out = np.zeros((self.p, self.p))
        if self.mean_component is not None:
            mc = self.mean_component
            out[mc, mc] = self._mean_info()
        return out

    def quantile(self, theta, u):
        """Inverse CDF at ``u``; vectorized. Rewards are sampled through this."""
        return self.mean(theta) + self._standard_quantile(u)

    def sample(self, theta, rng: np.random.Generator) -> float:
        """One draw from the arm's law, consuming exactly one uniform."""
        return float(self.quantile(theta, rng.random()))


@dataclass(frozen=True)
class GaussianArm(ArmModel):
    """Gaussian rewards with known variance ``sigma2``."""

    sigma2: float = 1.0

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.sigma2 > 0:
            raise ConfigurationError(f"sigma2 must be positive, got {self.sigma2}")

    def _centered_log_density(self, d):
        return -0.5 * math.log(2.0 * math.pi * self.sigma2) - d * d / (2.0 * self.sigma2)

    def _centered_score(self, d):
        return d / self.sigma2

    def _standard_quantile(self, u):
        u = np.maximum(u, _MIN_UNIFORM)
        return math.sqrt(self.sigma2) * ndtri(u)

    def _mean_info(self) -> float:
        return 1.0 / self.sigma2


@dataclass(frozen=True)
class LogisticArm(ArmModel):
    """Logistic rewards rescaled to unit variance.

    The scale is pinned at sqrt(3)/pi so the variance scale^2 * pi^2 / 3
    is one by construction, not by fitting.
    """

    def _centered_log_density(self, d):
        # Density is symmetric in d; folding to |d| keeps exp() from overflowing.
        x = np.abs(d) / LOGISTIC_SCALE
        return -x - math.log(LOGISTIC_SCALE) - 2.0 * np.log1p(np.exp(-x))

    def _centered_score(self, d):
        return np.tanh(d / (2.0 * LOGISTIC_SCALE)) / LOGISTIC_SCALE

    def _standard_quantile(self, u):
        u = np.maximum(u, _MIN_UNIFORM)
        return LOGISTIC_SCALE * (np.log(u) - np.log1p(-u))

    def _mean_info(self) -> float:
        return 1.0 / (3.0 * LOGISTIC_SCALE * LOGISTIC_SCALE)


def location_arms(family: str, n_arms: int, *, sigma2: float = 1.0) -> tuple[ArmModel, ...]:
    """Bundled location model: arm k's mean is parameter component k (p = K)."""
    if n_arms < 2:
        raise ConfigurationError("a bandit needs at least two arms")
    if family == FAMILY_GAUSSIAN:
        return tuple(
            GaussianArm(arm_index=k, p=n_arms, mean_component=k, sigma2=sigma2)
            for k in range(n_arms)
        )
    if family == FAMILY_LOGISTIC:
        return tuple(
            LogisticArm(arm_index=k, p=n_arms, mean_component=k) for k in range(n_arms)
        )
    raise ConfigurationError(f"unknown arm family: {family!r}")


def dqm_remainder_stat(arm: ArmModel, theta, omega, n: int, seed: int) -> float:
    """Monte Carlo estimate of E[r^2] / |omega|^2 for the square-root remainder.

    r(z | omega) = 2 (sqrt(f(z | theta + omega) / f(z | theta)) - 1) - score(z)' omega,
    averaged over ``n`` draws from f(. | theta). The draws depend only on
    ``seed``, so calls at different ``omega`` share common random numbers
    and their decay ratio is deterministic.
    """
    if n < 10_000:
        raise ConfigurationError("dqm_remainder_stat needs n >= 10^4 draws")
    theta = np.asarray(theta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (arm.p,):
        raise ConfigurationError(f"omega must have shape ({arm.p},)")
    norm2 = float(omega @ omega)
    if norm2 == 0.0:
        return 0.0
    z = arm.quantile(theta, stream(seed).random(n))
    half_log_ratio = 0.5 * (arm.log_density(theta + omega, z) - arm.log_density(theta, z))
    if arm.mean_component is None:
        score_dot = 0.0
    else:
        score_dot = omega[arm.mean_component] * arm._centered_score(z - arm.mean(theta))
    r = 2.0 * np.expm1(half_log_ratio) - score_dot
    return float(np.mean(r * r) / norm2)
