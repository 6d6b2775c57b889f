"""Exception hierarchy shared by every module."""


class StokesTraceError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(StokesTraceError, ValueError):
    """An argument lies outside the domain of an operation."""


class HermiticityError(StokesTraceError, ValueError):
    """A matrix failed Hermitian certification."""

    def __init__(self, defect, tol):
        self.defect = float(defect)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not Hermitian: defect ||M - M*|| = {self.defect:.3e} "
            f"exceeds tolerance {self.tol:.3e}"
        )


class CommutationError(StokesTraceError, ValueError):
    """A tuple of operators does not commute within tolerance."""

    def __init__(self, defect, tol):
        self.defect = float(defect)
        self.tol = float(tol)
        super().__init__(
            f"operators do not commute: max ||[A_i, A_j]|| = {self.defect:.3e} "
            f"exceeds tolerance {self.tol:.3e}"
        )


class NumericalFailure(StokesTraceError, ArithmeticError):
    """A numerical procedure did not converge or lost a required property."""
