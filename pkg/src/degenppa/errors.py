"""Exception types shared across the package.

Every error raised by the library is a subclass of DegenPpaError so callers
can catch broadly; the CLI maps the families to exit codes.
"""

__all__ = [
    "DegenPpaError",
    "NonSymmetric",
    "NotPsd",
    "DimensionMismatch",
    "InfeasibleConstraint",
    "RankDeficient",
    "InnerNotConverged",
    "StrategyMismatch",
    "UnboundedSearch",
    "InverseUnavailable",
    "NotAFixedPoint",
    "NotAZero",
    "SamplerStarved",
    "KernelSetUnknown",
    "UnsupportedShape",
    "UnknownCheck",
    "UnknownExample",
    "ParseError",
    "ValidationError",
    "SolverFailure",
]


class DegenPpaError(Exception):
    """Base class for all package errors."""


class NonSymmetric(DegenPpaError):
    """Metric matrix fails the relative symmetry test."""


class NotPsd(DegenPpaError):
    """Metric matrix has an eigenvalue below the negative tolerance."""


class DimensionMismatch(DegenPpaError):
    """Vector or matrix dimensions are inconsistent."""


class InfeasibleConstraint(DegenPpaError):
    """Affine indicator set Bx = b is empty."""


class RankDeficient(DegenPpaError):
    """Matrix lacks the rank structure a solve requires."""


class InnerNotConverged(DegenPpaError):
    """Inner iterative solve exhausted its budget; carries the residual."""

    def __init__(self, residual, message=""):
        self.residual = float(residual)
        super().__init__(message or f"inner solve stalled at residual {residual:.3e}")


class StrategyMismatch(DegenPpaError):
    """Requested resolvent strategy does not match the problem structure."""


class UnboundedSearch(DegenPpaError):
    """Grid search exhausted its region while the residual kept shrinking."""


class InverseUnavailable(DegenPpaError):
    """No inverse/conjugate representation for the requested identity."""


class NotAFixedPoint(DegenPpaError):
    """Supplied reference point fails the fixed-point verification."""


class NotAZero(DegenPpaError):
    """Supplied point fails the 0 in A(z) membership check."""


class SamplerStarved(DegenPpaError):
    """Rejection sampler acceptance rate fell below the floor."""


class KernelSetUnknown(DegenPpaError):
    """Kernel-set classification requested for a non-analytic operator."""


class UnsupportedShape(DegenPpaError):
    """Set geometry outside the interval-product class."""


class UnknownCheck(DegenPpaError):
    """Verification check name not in the registry."""


class UnknownExample(DegenPpaError):
    """Example name not in the registry."""


class ParseError(DegenPpaError):
    """Problem file could not be parsed."""


class ValidationError(DegenPpaError):
    """Problem file parsed but failed validation."""


class SolverFailure(DegenPpaError):
    """Resolvent solve failed at iteration k (Empty or MultiValued outcome)."""

    def __init__(self, k, message=""):
        self.k = int(k)
        super().__init__(message or f"resolvent solve failed at iteration {k}")
