"""Exception types raised by esdlab."""


class NonPhysicalStateError(ValueError):
    """A state violates normalization, positivity or finiteness.

    ``branch`` names the violated invariant: ``"finite"``, ``"normalization"``,
    ``"positivity"`` or ``"hermiticity"``.
    """

    def __init__(self, message: str, branch: str):
        super().__init__(message)
        self.branch = branch


class EigenvalueConvergenceError(ArithmeticError):
    """The dense eigensolver did not converge."""
