"""Exception types shared across the package.

The command line maps these onto exit codes: ValidationError -> 1,
NumericalError -> 2, OSError -> 3.
"""


class LevelstatsError(Exception):
    """Base class for package errors."""


class ValidationError(LevelstatsError, ValueError):
    """Invalid argument or configuration value."""


class NumericalError(LevelstatsError, RuntimeError):
    """A numerical contract failed (degeneracy check, root bracket, non-finite value)."""
