"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RegimeError(ValueError):
    """The tail index is outside the regime an analytic law covers."""


class ConfigError(ValueError):
    """An experiment configuration is inconsistent."""
