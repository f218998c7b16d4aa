"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid experiment, policy, or arm configuration."""


class UniqueOptimalArmViolation(ValueError):
    """Two or more arms tie for the highest mean reward.

    The rate and expansion machinery requires a strictly best arm; with an
    exact tie none of the diagnostics are meaningful, so we refuse instead
    of picking a winner silently.
    """
