"""Exception hierarchy shared across the package."""


class ToposQTError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(ToposQTError):
    pass


class NotProjection(ToposQTError):
    pass


class DimensionMismatch(ToposQTError):
    pass


class NonCommuting(ToposQTError):
    pass


class TooManyBlocks(ToposQTError):
    pass


class PosetNotDownClosed(ToposQTError):
    pass


class NotUnitVector(ToposQTError):
    pass


class AmbientMismatch(ToposQTError):
    pass


class NotMonotone(ToposQTError):
    pass


class NotNatural(ToposQTError):
    pass


class MissingContext(ToposQTError):
    pass


class CompositionMismatch(ToposQTError):
    pass


class KindMismatch(ToposQTError):
    pass


class UnknownSymbol(ToposQTError):
    pass


class InvariantViolation(ToposQTError):
    pass
