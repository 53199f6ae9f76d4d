"""Exception hierarchy shared by all levyfield modules."""


class LevyFieldError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(LevyFieldError, ValueError):
    """An argument violates a documented precondition (non-finite values,
    empty grids, negative variances, ...)."""


class GridMismatchError(InvalidInputError):
    """Two grid functions with incompatible spacings or domains."""


class CoverageError(LevyFieldError):
    """A tabulated density or spectral estimate does not cover the
    argument range required by the requested operation."""


class SingularRecoveryError(LevyFieldError):
    """The drift cannot be recovered because the kernel coefficient sum
    vanishes (the linear recovery map is singular)."""


class PreconditionError(LevyFieldError):
    """A structural precondition fails (non-maximal pivot, contraction
    factor >= 1 where a contraction is required, ...)."""


class DegeneracyError(LevyFieldError):
    """Gram-Schmidt produced a numerically dependent system."""


class SingularSystemError(LevyFieldError):
    """A triangular coefficient system has a zero diagonal entry."""


class BoundInapplicableError(LevyFieldError):
    """An error bound was requested outside its regime of validity
    (contraction factor >= 1)."""


class DivergentBoundError(LevyFieldError):
    """A bound evaluates to infinity, e.g. the characteristic function
    vanishes on the integration grid."""


class ResourceLimitError(LevyFieldError):
    """The requested computation exceeds the configured memory or term
    budget.  The message carries the required size."""


class ConfigError(LevyFieldError):
    """Malformed experiment configuration (unknown keys, bad types)."""
