"""Exception hierarchy shared across the package.

Exit codes used by the CLI: 0 success, 2 configuration error,
3 data integrity error, 4 diagnostic assertion failure.
"""


class HystermError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(HystermError):
    """Invalid scenario configuration or CLI arguments."""

    exit_code = 2


class CFLError(ConfigError):
    """Time step violates the explicit-Euler stability bound."""


class DataIntegrityError(HystermError):
    """Stored snapshot data is missing or fails its digest check."""

    exit_code = 3


class DiagnosticError(HystermError):
    """A diagnostic self-check or assertion failed."""

    exit_code = 4
