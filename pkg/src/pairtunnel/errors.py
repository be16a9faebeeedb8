"""Exception types mapped onto CLI exit codes (2 config, 3 numerical, 4 I/O)."""

__all__ = ["ConfigError", "NumericalError", "NotGuidedError"]


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class NumericalError(RuntimeError):
    """A computation failed: divergence, NaNs or non-convergence."""


class NotGuidedError(NumericalError):
    """A requested mode is not bound by the potential."""
