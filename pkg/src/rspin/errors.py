"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class RSpinError(Exception):
    """Base class for every error raised by this package."""


# scalar
class MixedRError(RSpinError):
    pass


class NotMonomialUnitError(RSpinError):
    pass


class NotRationalError(RSpinError):
    pass


class EpsWindowError(RSpinError):
    """An epsilon exponent fell below the declared window."""


# series
class SpaceMismatchError(RSpinError):
    pass


class BadVarError(RSpinError):
    pass


class OutOfCapError(RSpinError):
    pass


class NonLinearSubstitutionError(RSpinError):
    pass


class CapExceededError(RSpinError):
    def __init__(self, message: str, needed: int | None = None):
        super().__init__(message)
        self.needed = needed


# symbols and operators
class BelowValidRangeError(RSpinError):
    pass


class NotMonicError(RSpinError):
    pass


class DepthUnreachableError(RSpinError):
    pass


# hierarchy
class InternalInconsistencyError(RSpinError):
    pass


class StringCheckFailedError(RSpinError):
    pass


class GenusLeakError(EpsWindowError):
    pass


class BadIndexError(RSpinError):
    pass


class InconsistentError(RSpinError):
    pass


# correlators
class UnmappedVariableError(RSpinError):
    pass


class TwoMinusOneInsertionsError(RSpinError):
    pass


class MalformedKeyError(RSpinError):
    """Malformed correlator key (bad twist, descendent or sector)."""
