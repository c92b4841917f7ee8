"""Exception hierarchy shared by every module of the package."""


class QMatFunError(Exception):
    """Base class for all errors raised by :mod:`qmatfun`."""


class NotHermitianError(QMatFunError, ValueError):
    """Input matrix is not Hermitian within tolerance.

    Attributes
    ----------
    asymmetry : float
        Largest entry of ``|M - M^H|`` relative to ``max|M|``.
    """

    def __init__(self, asymmetry, tol):
        self.asymmetry = float(asymmetry)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds {tol:.1e}"
        )


class DomainError(QMatFunError, ValueError):
    """A scalar function is undefined at (or near) a point it is asked to evaluate."""

    def __init__(self, message, value=None):
        self.value = value
        super().__init__(message)


class SingularMatrixError(QMatFunError, ValueError):
    """Matrix is (numerically) singular where an inverse is required."""

    def __init__(self, lambda_min, floor):
        self.lambda_min = float(lambda_min)
        self.floor = float(floor)
        super().__init__(
            f"matrix is singular for this purpose: lambda_min={lambda_min:.3e} <= {floor:.1e}"
        )


class ParameterError(QMatFunError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DimensionError(QMatFunError, ValueError):
    """Operands have incompatible shapes."""


class NormError(QMatFunError, ValueError):
    """A matrix to be dilated has operator norm larger than one."""

    def __init__(self, norm):
        self.norm = float(norm)
        super().__init__(f"operator norm {norm:.15g} exceeds 1; cannot dilate")


class WindowError(QMatFunError, ValueError):
    """A spectrum lies outside the interval an approximation is certified on."""

    def __init__(self, message, lo=None, hi=None, observed=None):
        self.lo = lo
        self.hi = hi
        self.observed = observed
        super().__init__(message)


class CapabilityError(QMatFunError, NotImplementedError):
    """The requested function has no built-in representation and none was supplied."""


class ContractError(QMatFunError, ValueError):
    """A polynomial violates the boundedness required for a transform."""

    def __init__(self, message, x=None, value=None):
        self.x = x
        self.value = value
        super().__init__(message)


class ValidationError(QMatFunError, ValueError):
    """Input data fails a structural check (trace, positivity, file format)."""
