"""Exception hierarchy shared by the inference modules."""


class MaxEntError(Exception):
    """Base class for all errors raised by maxent_bell."""


class DimensionError(MaxEntError, ValueError):
    """Operands have incompatible or unsupported shapes."""


class InvariantError(MaxEntError, ValueError):
    """A matrix fails the Hermitian / density-matrix checks."""


class DomainError(MaxEntError, ValueError):
    """A scalar parameter lies outside the admissible region."""


class BoundaryError(DomainError):
    """Point sits on (or within epsilon of) the boundary where multipliers diverge."""


class InfeasibleError(MaxEntError, ValueError):
    """Constraint targets cannot be met by any density matrix."""


class LinearDependenceError(MaxEntError, ValueError):
    """Constraint observables are linearly dependent."""


class BoundaryDivergenceError(MaxEntError, RuntimeError):
    """Dual iterations ran off to infinity, the target is on the feasible boundary."""

    def __init__(self, message, multipliers=None):
        super().__init__(message)
        self.multipliers = multipliers


class NotConvergedError(MaxEntError, RuntimeError):
    """Raised when a converged solution is required but not available."""
