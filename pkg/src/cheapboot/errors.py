"""Exception types shared across the package.

Everything derives from ValueError so callers who don't care about the
fine-grained class can catch the usual thing.
"""


class CheapbootError(ValueError):
    """Base class for all package-specific errors."""


class ParameterDomainError(CheapbootError):
    """An argument is outside its admissible domain (B too small, bad level, ...)."""


class InsufficientReplicatesError(ParameterDomainError):
    """Fewer replicates or resamples than the method's minimum."""


class EmptyInputError(ParameterDomainError):
    """An operation received an empty dataset or stream."""


class StepSizeDomainError(CheapbootError):
    """A step-size configuration violates the stability condition it must satisfy."""


class SingularMatrixError(CheapbootError):
    """A matrix that must be invertible is singular or not positive definite."""


class DivergenceError(CheapbootError):
    """An iterate or gradient became non-finite during optimization."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"non-finite iterate/gradient at step {step}")


class DegeneratePivotError(CheapbootError):
    """A studentized statistic was requested with zero spread in the denominator."""


class LayoutError(CheapbootError):
    """A batch layout or thread architecture is structurally invalid."""


class InsufficientDataError(CheapbootError):
    """A data stream ran out before the consumer's budget was met."""


class ConfigError(CheapbootError):
    """An experiment configuration is inconsistent or incomplete."""
