"""Exception hierarchy shared by all jdpp modules."""


class JDPPError(Exception):
    """Base class for library errors."""


class PreconditionError(JDPPError, ValueError):
    """An operation was called outside its documented domain."""


class InvalidKernelError(JDPPError):
    """The kernel does not define a point process (or fails a structural test)."""


class SingularError(JDPPError, ArithmeticError):
    """A matrix that has to be inverted is singular or numerically so."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NormOneError(PreconditionError):
    """The restricted kernel has operator norm 1, so no L-operator exists."""


class EnumerationCapError(PreconditionError):
    """The ground set is too large for exhaustive enumeration."""


class NegativeMassError(InvalidKernelError):
    """Mobius inversion produced a mass below the roundoff floor.

    ``severe`` is set when the mass is below ``-1e-6``, which cannot be
    roundoff and means the kernel is not a correlation kernel at all.
    """

    def __init__(self, message, min_mass, masses=None):
        super().__init__(message)
        self.min_mass = float(min_mass)
        self.masses = masses
        self.severe = self.min_mass < -1e-6


class NumericalInconsistencyError(JDPPError, ArithmeticError):
    """Two evaluation routes for the same quantity disagree beyond tolerance."""
