"""Flat key=value run-configuration files with dotted sections.

Lines look like ``policy.kind=thompson`` or ``study.T=500``; blank lines and
``#`` comments are ignored. Unknown keys are rejected by name. The full
schema, defaults included, is documented in the README.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

from .arms import FAMILY_GAUSSIAN, FAMILY_LOGISTIC, ArmModel, location_arms
from .errors import ConfigurationError
from .lan import RateRegime
from .montecarlo import StudyConfig
from .policies import Clipped, Policy, RCT, ThompsonGaussian, UCB1


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigurationError(f"expected an integer, got {text!r}") from exc


def _parse_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigurationError(f"expected a number, got {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigurationError(f"expected a finite number, got {text!r}")
    return value


def _parse_float_list(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigurationError("expected a comma-separated list of numbers")
    return tuple(_parse_float(p) for p in parts)


def _parse_int_list(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigurationError("expected a comma-separated list of integers")
    return tuple(_parse_int(p) for p in parts)


def _parse_choice(*choices: str):
    def parse(text: str) -> str:
        if text not in choices:
            raise ConfigurationError(f"expected one of {choices}, got {text!r}")
        return text

    return parse


# key -> (parser, default string or None when unset by default)
SCHEMA: dict[str, tuple] = {
    "study.T": (_parse_int, "500"),
    "study.K": (_parse_int, "2"),
    "study.replications": (_parse_int, "10000"),
    "study.base_seed": (_parse_int, "123456789"),
    "study.m1_grid": (_parse_float_list, "2,10,50,75"),
    "study.regime": (_parse_choice("case_b", "case_b_star"), "case_b"),
    "study.h": (_parse_float_list, None),
    "study.true_c": (_parse_float_list, None),
    "arms.family": (_parse_choice(FAMILY_GAUSSIAN, FAMILY_LOGISTIC), FAMILY_LOGISTIC),
    "arms.sigma2": (_parse_float, "1.0"),
    "policy.kind": (_parse_choice("thompson", "ucb1", "rct", "clipped"), "thompson"),
    "thompson.prior_var": (_parse_float, "1.0"),
    "thompson.assumed_var": (_parse_float, "1.0"),
    "rct.weights": (_parse_float_list, "0.5,0.5"),
    "clipped.epsilon": (_parse_float, "0.05"),
    "clipped.inner": (_parse_choice("thompson", "ucb1", "rct"), "thompson"),
    "lan.t_ladder": (_parse_int_list, "200,2000,20000"),
    "convergence.checkpoints": (_parse_int_list, None),
    "convergence.delta": (_parse_float, None),
}

# `policy=...` is accepted as shorthand for `policy.kind=...`.
ALIASES = {"policy": "policy.kind"}


def parse_config_text(text: str) -> dict[str, str]:
    """Raw key=value pairs from a config file body."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        key = ALIASES.get(key, key)
        if key in raw:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


@dataclass(frozen=True)
class RunSettings:
    """Typed, fully resolved run settings plus their canonical echo."""

    values: dict
    canonical: dict[str, str]

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def config_hash(self, subcommand: str) -> str:
        body = subcommand + "\n" + "\n".join(
            f"{k}={v}" for k, v in sorted(self.canonical.items())
        )
        return hashlib.sha256(body.encode()).hexdigest()[:12]


def resolve_settings(raw: dict[str, str], overrides: dict[str, str] | None = None) -> RunSettings:
    """Merge file values with CLI overrides, validate, and type every key."""
    merged = dict(raw)
    for key, value in (overrides or {}).items():
        key = ALIASES.get(key, key)
        merged[key] = value

    unknown = sorted(set(merged) - set(SCHEMA))
    if unknown:
        raise ConfigurationError(f"unknown config key: {unknown[0]!r}")

    values: dict = {}
    canonical: dict[str, str] = {}
    for key, (parse, default) in SCHEMA.items():
        text = merged.get(key, default)
        if text is None:
            values[key] = None
            continue
        try:
            values[key] = parse(str(text))
        except ConfigurationError as exc:
            raise ConfigurationError(f"{key}: {exc}") from exc
        canonical[key] = str(text)
    return RunSettings(values=values, canonical=canonical)


def build_arms(settings: RunSettings) -> tuple[ArmModel, ...]:
    k = settings["study.K"]
    if k < 2:
        raise ConfigurationError("study.K: a bandit needs at least two arms")
    family = settings["arms.family"]
    if family == FAMILY_GAUSSIAN:
        sigma2 = settings["arms.sigma2"]
        if sigma2 <= 0:
            raise ConfigurationError("arms.sigma2: must be positive")
        return location_arms(family, k, sigma2=sigma2)
    return location_arms(family, k)


def _basic_policy(kind: str, settings: RunSettings, k: int) -> Policy:
    if kind == "thompson":
        return ThompsonGaussian(
            k,
            prior_var=settings["thompson.prior_var"],
            assumed_var=settings["thompson.assumed_var"],
        )
    if kind == "ucb1":
        return UCB1(k)
    if kind == "rct":
        weights = settings["rct.weights"]
        if len(weights) != k:
            raise ConfigurationError(
                f"rct.weights: expected {k} weights, got {len(weights)}"
            )
        return RCT(weights)
    raise ConfigurationError(f"policy.kind: unsupported kind {kind!r}")


def build_policy(settings: RunSettings) -> Policy:
    k = settings["study.K"]
    kind = settings["policy.kind"]
    if kind == "clipped":
        inner = _basic_policy(settings["clipped.inner"], settings, k)
        return Clipped(inner, epsilon=settings["clipped.epsilon"])
    return _basic_policy(kind, settings, k)


def build_study(settings: RunSettings, *, t_override: int | None = None,
                m1_override: tuple[float, ...] | None = None) -> StudyConfig:
    horizon = t_override if t_override is not None else settings["study.T"]
    m1_grid = m1_override if m1_override is not None else settings["study.m1_grid"]
    base_seed = settings["study.base_seed"]
    if not 0 <= base_seed < 2**64:
        raise ConfigurationError("study.base_seed: must be an unsigned 64-bit integer")
    return StudyConfig(
        T=horizon,
        arms=build_arms(settings),
        policy=build_policy(settings),
        m1_grid=tuple(m1_grid),
        replications=settings["study.replications"],
        base_seed=base_seed,
        regime=RateRegime(settings["study.regime"]),
        h=settings["study.h"],
        true_c=settings["study.true_c"],
    )
