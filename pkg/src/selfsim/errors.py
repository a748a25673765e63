"""Exception types shared across the package."""


class SelfSimError(Exception):
    """Base class for all package errors."""


class InvalidParams(SelfSimError, ValueError):
    pass


class InvalidStage(SelfSimError, ValueError):
    pass


class StageCapExceeded(SelfSimError):
    """No stage up to the cap can represent the requested translate.

    Callers are expected to retry with a larger ``max_stage``.
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class IndexOutOfRange(SelfSimError, IndexError):
    pass


class NotInInvariantSet(SelfSimError, ValueError):
    pass


class AmbiguousComponent(SelfSimError, ValueError):
    """A stage-1 level straddles several ergodic components of T^p."""


class GridNotDivisible(SelfSimError, ValueError):
    pass


class LengthMismatch(SelfSimError, ValueError):
    pass


class NotCoprime(SelfSimError, ValueError):
    pass


class NotPisot(SelfSimError, ValueError):
    pass


class InvalidQ(SelfSimError, ValueError):
    pass


class StageTooLow(SelfSimError, ValueError):
    pass
