"""Exception types shared across the package."""


class AgreementError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(AgreementError, ValueError):
    pass


class InvalidOperator(AgreementError, ValueError):
    """An operator failed a structural check (projector, density, completeness)."""


class ConvergenceError(AgreementError, ArithmeticError):
    pass


class ZeroConditioningWeight(AgreementError, ArithmeticError):
    """Conditioning on an outcome whose probability is (numerically) zero."""

    def __init__(self, message, weight=0.0, branch=None):
        super().__init__(message)
        self.weight = weight
        self.branch = branch


class NonProjectorProduct(AgreementError, ArithmeticError):
    pass


class NonCommutingMeasurements(AgreementError, ValueError):
    pass


class SignedConditioning(AgreementError, ArithmeticError):
    """A classical conditioning cell has nonpositive total weight."""


class ContextError(AgreementError, ValueError):
    """A pair of box measurements is not jointly measurable."""
