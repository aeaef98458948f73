"""Exception hierarchy shared by the engines and the CLI."""


class JSDMError(Exception):
    """Base class for all package errors."""


class ConfigError(JSDMError):
    """Invalid or unparseable configuration."""


class PrecodingError(JSDMError):
    """Infeasible or degenerate precoder construction."""


class ConvergenceError(JSDMError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class RegionError(JSDMError):
    """Point outside the association rectangle."""
