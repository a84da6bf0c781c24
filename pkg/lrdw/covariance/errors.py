from __future__ import annotations

__all__ = [
    "NumericalError",
    "NotPositiveDefinite",
    "NotHermitian",
    "SubcriticalSpike",
    "NoDetection",
    "NonPositiveEigenvalue",
    "EmptySignal",
    "QuadratureError",
    "DimensionMismatch",
    "InvalidModel",
]


class NumericalError(ArithmeticError):
    """
    Base class of failures that come from the numbers themselves rather than
    from a malformed request. The command line maps these to exit code 3.
    """


class NotPositiveDefinite(NumericalError):
    def __init__(self, msg: str, lambda_min: float = None, lambda_max: float = None):
        super(NotPositiveDefinite, self).__init__(msg)
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max

    def __str__(self):
        if self.lambda_min is None:
            return super(NotPositiveDefinite, self).__str__()
        return (
            f"{super(NotPositiveDefinite, self).__str__()} "
            f"(lambda_min={self.lambda_min:.6g}, lambda_max={self.lambda_max:.6g})"
        )


class NotHermitian(NumericalError):
    pass


class SubcriticalSpike(NumericalError):
    pass


class NoDetection(NumericalError):
    pass


class NonPositiveEigenvalue(NumericalError):
    pass


class EmptySignal(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class DimensionMismatch(ValueError):
    pass


class InvalidModel(ValueError):
    pass
