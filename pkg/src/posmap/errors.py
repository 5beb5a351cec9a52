"""Exception types shared across the package.

Everything raised deliberately by this library derives from AnalysisError,
so callers can catch one base class at API boundaries (the CLI and the
service layer both do).
"""


class AnalysisError(Exception):
    """Base class for all errors raised by this package."""


class DimMismatch(AnalysisError):
    """A matrix or vector has a shape incompatible with the declared sizes."""


class LengthMismatch(AnalysisError):
    """A flat vector cannot be reshaped to the requested dimensions."""


class IndexOutOfRange(AnalysisError):
    """A row/column/block index lies outside the valid range."""


class NotHermitian(AnalysisError):
    """An operation requiring a Hermitian matrix received a non-Hermitian one."""


class NotStarLinear(AnalysisError):
    """The map does not satisfy the adjoint-compatibility criteria."""


class SpanViolation(AnalysisError):
    """A block lies outside the span of the selected basis blocks."""


class KernelMismatch(AnalysisError):
    """The supplied kernel matrix does not reproduce the map's Choi matrix."""


class NotEquivalent(AnalysisError):
    """No invertible transform links the two Hill representations."""


class NotInRange(AnalysisError):
    """The target vector lies outside the attainable set (certified)."""


class UnsupportedPattern(AnalysisError):
    """The block pattern falls outside what the constructive theory covers."""


class TooLarge(AnalysisError):
    """The requested exhaustive computation exceeds the size guard."""


class FieldViolation(AnalysisError):
    """Complex data was supplied where the real field was declared."""


class PatternViolation(AnalysisError):
    """The position list violates a structural requirement."""


class InfeasiblePattern(AnalysisError):
    """The requested construction cannot produce the demanded structure."""


class ParseError(AnalysisError):
    """Malformed input file or inline matrix specification."""
