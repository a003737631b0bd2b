"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, ValidationError -> 3,
IntegrationError (and I/O failures) -> 4.
"""


class SphereSyncError(Exception):
    pass


class ConfigError(SphereSyncError, ValueError):
    """Config file cannot be parsed against the schema (syntax, unknown or
    missing keys, wrong types)."""


class ValidationError(SphereSyncError, ValueError):
    """Inputs parse but violate a documented invariant."""


class IntegrationError(SphereSyncError, RuntimeError):
    """A run failed while stepping; `step` is the offending step index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DriftError(IntegrationError):
    """Norm drift exceeded the configured tolerance with renormalize off."""


class NonFiniteError(IntegrationError):
    """The state left the space of finite floating-point numbers."""
