"""Exception types and outcome markers shared across the package."""

from enum import Enum


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ResolutionError(ValueError):
    """The momentum quadrature is too coarse for the requested time."""


class ResourceError(RuntimeError):
    """A size cap (block length, chain length, bond dimension) was exceeded."""


class DegenerateMomentsError(ValueError):
    """Moment sums violate the identity-string floor."""


class InsufficientWindowError(ValueError):
    """Too few resolved points to fit a spreading velocity."""


class NoRevivalError(RuntimeError):
    """No Loschmidt-echo peak clears the prominence threshold."""


class DegeneracyWarning(UserWarning):
    """Eigenvalues were merged into degenerate clusters."""


class Flag(str, Enum):
    """Non-numeric outcomes that are values rather than errors."""

    NOT_EQUILIBRATED = "NOT_EQUILIBRATED"
    UNRESOLVED = "UNRESOLVED"
    DEGENERATE = "DEGENERATE"
    LOW_CONFIDENCE = "LOW_CONFIDENCE"
    DEPHASED = "DEPHASED"

    def __str__(self):
        return self.value
