"""Exception hierarchy shared by all spectravol modules."""


class SpectravolError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(SpectravolError, ValueError):
    pass


class NotSymmetric(SpectravolError, ValueError):
    pass


class NotPositiveDefinite(SpectravolError, ValueError):
    pass


class NotPSD(SpectravolError, ValueError):
    pass


class RankDeficient(SpectravolError, ValueError):
    """Constraint matrices are linearly dependent (or too many of them)."""


class Infeasible(SpectravolError):
    """The affine slice does not meet the PSD cone."""


class NotStrictlyFeasible(SpectravolError):
    """The affine slice touches the PSD cone only on its boundary."""


class MaxIterationsExceeded(SpectravolError):
    pass


class LineSearchStalled(SpectravolError):
    pass


class PreconditionViolation(SpectravolError, ValueError):
    """A documented precondition on a scalar parameter does not hold."""


class XiOutOfRange(PreconditionViolation):
    pass


class MCollinearWithIdentity(PreconditionViolation):
    pass


class SizeBudgetExceeded(PreconditionViolation):
    pass


class SliceDimensionTooLarge(PreconditionViolation):
    pass


class ZeroAcceptances(SpectravolError):
    pass


class UnboundedSuspected(SpectravolError):
    pass


class ChordError(SpectravolError):
    pass


class InstanceFormatError(SpectravolError, ValueError):
    """A spectrahedron file could not be parsed or failed validation."""
