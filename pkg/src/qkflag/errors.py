"""Exception hierarchy shared across the package.

Each error kind maps to one CLI exit code; see ``qkflag.cli``.
"""


class QKFlagError(Exception):
    """Base class for all package errors."""


class CartanParseError(QKFlagError):
    """Type string does not match the ``<letter><rank>[~]`` grammar."""


class UnsupportedTypeError(QKFlagError):
    """Well-formed label outside the catalog (bad rank, affine non-A, unknown letter)."""


class DatumMismatchError(QKFlagError):
    """Operands belong to different Cartan data or different ranks."""


class NotInConeError(QKFlagError):
    """Vector arithmetic left the nonnegative cone."""


class ExponentOverflowError(QKFlagError):
    """An exponent exceeded the machine bound; never silently wrapped."""


class PoleError(QKFlagError):
    """Evaluation point lies on a denominator factor."""

    def __init__(self, message: str, factor=None):
        super().__init__(message)
        self.factor = factor


class GradingError(QKFlagError):
    """Requested series grading is invalid for the given denominator."""


class CacheCorruptError(QKFlagError):
    """A cache file failed integrity checks; names the offending entry."""


class InternalInvariantError(QKFlagError):
    """A 'cannot happen' condition; always a bug in this package."""
