"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad or off-manifold
input; the CLI maps it to exit code 2) and ``NumericalError`` (a computation
that should have succeeded did not; exit code 3).
"""


class ThreeOscError(Exception):
    pass


class ValidationError(ThreeOscError, ValueError):
    pass


class NumericalError(ThreeOscError, ArithmeticError):
    pass


class PositivityError(ValidationError):
    """Hamiltonian matrix is not positive definite."""


class CutoffViolation(ValidationError):
    """A normal-mode frequency reaches the bath cutoff."""


class BranchUndefined(ValidationError):
    """Negative radicand in the requested branch."""


class NotOnManifold(ValidationError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonPhysical(ValidationError):
    pass


class SymmetryViolated(ValidationError):
    pass


class BasisMismatch(ValidationError):
    pass


class RegimeError(ValidationError):
    pass


class WindowError(ValidationError):
    pass


class DegenerateError(NumericalError):
    """Windowed variance vanishes; the indicator is undefined."""
