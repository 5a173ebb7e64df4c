"""Exception types raised by knotwave."""


class KnotwaveError(Exception):
    """Base class for all library errors."""


class InvalidIntervalError(KnotwaveError, ValueError):
    """An interval [u, v] was given with u >= v."""


class DomainError(KnotwaveError, ValueError):
    """An argument lies outside the domain of the operation."""


class KnotNotFoundError(KnotwaveError, KeyError):
    """A knot was looked up in a window that does not contain it."""


class WindowCutError(KnotwaveError):
    """A neighbour was requested across a window cut, where it is unknown."""


class DependentSetError(KnotwaveError):
    """A projection target set is numerically linearly dependent."""


class ContractError(KnotwaveError, ValueError):
    """An input violates the documented precondition of an operation."""


class ConsistencyError(KnotwaveError):
    """An internal identity that must hold by construction failed numerically."""


class NotNestedError(KnotwaveError):
    """Two scaling spaces are not nested as required."""
