"""Exception types shared across the package.

Everything raised on purpose derives from QuickTapError so callers (and the
CLI) can distinguish contract violations from bugs.
"""


class QuickTapError(Exception):
    """Base class for all errors raised by this package."""


class MalformedStreamError(QuickTapError):
    """Touch stream violates phase ordering.

    Carries the index of the offending sample in ``sample_index``.
    """

    def __init__(self, message: str, sample_index: int):
        super().__init__(f"{message} (sample index {sample_index})")
        self.sample_index = sample_index


class EmptyInputError(QuickTapError):
    """An operation that needs at least one row/sample got none."""


class ClassBalanceError(QuickTapError):
    """Both classes are required but one is absent."""


class DimensionMismatchError(QuickTapError):
    """Vector/scaler/profile dimensions do not line up."""


class InsufficientDataError(QuickTapError):
    """Not enough rows for the requested split or cross-validation."""


class SolverError(QuickTapError):
    """Optimizer failed to reach the requested tolerance.

    ``gap`` holds the final KKT violation.
    """

    def __init__(self, message: str, gap: float):
        super().__init__(f"{message} (final optimality gap {gap:.3e})")
        self.gap = gap


class TruthMissingError(QuickTapError):
    """Scored taps lack ground-truth labels where truth is required."""


class ConfigError(QuickTapError):
    """A configuration value is out of its documented domain."""


class ProfileMismatchError(QuickTapError):
    """Model and data were produced under different device profiles."""


class SchemaError(QuickTapError):
    """A stored file violates its schema.

    ``line`` is the 1-based offending line for line-oriented formats, or
    None for document-level problems.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class GenerationError(QuickTapError):
    """Synthetic trace failed its own closure check."""


class MismatchedReportsError(QuickTapError):
    """Two replay reports do not cover the same tap set."""


class ZeroVarianceError(QuickTapError):
    """Effect size is undefined because the pooled variance is zero."""
