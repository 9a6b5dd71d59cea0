"""Exception types raised by latzeta."""


class LatticeError(ValueError):
    """Base class for every error raised by the package."""


class DegenerateBasisError(LatticeError):
    pass


class EnumerationBudgetError(LatticeError):
    pass


class ContainmentError(LatticeError):
    pass


class PrimitivityError(LatticeError):
    pass


class DomainError(LatticeError):
    pass


class OutOfRangeError(LatticeError):
    """Argument outside the supported numerical envelope."""


class DivergenceError(DomainError):
    """Requested lattice sum does not converge (s <= rank/2)."""


class InsufficientRadiusError(LatticeError):
    pass


class NotSemistableError(LatticeError):
    """Some sublattice has determinant below one."""


class ToleranceError(LatticeError):
    pass
