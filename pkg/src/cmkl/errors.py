"""Exception types shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, NumericalError -> 4.
"""


class CmklError(Exception):
    """Base class for all package errors."""


class ConfigError(CmklError):
    """Invalid experiment configuration (bad file, missing/invalid fields)."""


class DataError(CmklError):
    """Invalid dataset content (bad CSV cell, missing column, label problems)."""


class NumericalError(CmklError):
    """Numerical failure (indefinite pencil, degenerate kernel, unbounded QP)."""
