"""Exception and warning types shared by all modules."""


class InverseSourceError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(InverseSourceError):
    """Invalid scenario configuration or malformed input file."""


class InvalidDomain(InverseSourceError, ValueError):
    pass


class UnsupportedCount(InverseSourceError):
    pass


class UnsupportedDomain(InverseSourceError):
    pass


class PointOutsideDomain(InverseSourceError, ValueError):
    pass


class NotOnBoundary(InverseSourceError, ValueError):
    pass


class QuadratureFailure(InverseSourceError):
    pass


class InsufficientModes(InverseSourceError):
    pass


class OverflowRisk(InverseSourceError, OverflowError):
    pass


class GridTooCoarse(InverseSourceError):
    pass


class InvalidGrid(InverseSourceError, ValueError):
    pass


class CFLViolation(InvalidGrid):
    pass


class ValueOutOfRange(InverseSourceError, ValueError):
    pass


class NonMonotone(InverseSourceError):
    pass


class DiscrepancyUnattainable(InverseSourceError):
    pass


class EtaOutOfRange(InverseSourceError, ValueError):
    pass


class ConditionViolated(InverseSourceError):
    """A uniqueness condition needed by an inversion does not hold.

    ``condition`` carries the condition id (e.g. ``"1.15"``) and ``indices``
    the offending mode indices when known.
    """

    def __init__(self, message, condition=None, indices=()):
        super().__init__(message)
        self.condition = condition
        self.indices = tuple(indices)


class MomentZero(ConditionViolated):
    def __init__(self, message, indices=()):
        super().__init__(message, condition="1.29", indices=indices)


class ConstantUnpinnable(ConditionViolated):
    def __init__(self, message):
        super().__init__(message, condition="1.15")


class TruncationWarning(UserWarning):
    pass


class IllConditionedWarning(UserWarning):
    pass


class ModeDivideByZeroWarning(UserWarning):
    pass
