"""Exception types raised across the package."""


class HMPError(Exception):
    """Base class for all errors raised by hmp_entropy."""


class InvalidInputError(HMPError, ValueError):
    pass


class InvalidParameterError(InvalidInputError):
    """A process parameter (p, eps) lies outside its admissible range."""


class ResourceLimitError(HMPError):
    """An exhaustive enumeration was requested above the configured cap."""


class UnsupportedRingElementError(HMPError, ArithmeticError):
    """A product of two log-carrying expressions was requested."""


class EvaluationPoleError(HMPError, ZeroDivisionError):
    pass


class InfiniteCouplingError(InvalidParameterError):
    """eps == 0 or p in {0, 1}: the Ising coupling would be infinite."""


class UnsupportedOrderError(HMPError, ValueError):
    pass


class DegenerateRatioError(HMPError, ValueError):
    pass


class NoConvergenceError(HMPError, RuntimeError):
    pass
