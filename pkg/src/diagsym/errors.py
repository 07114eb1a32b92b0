"""Exception and warning types raised across the package.

The CLI maps each family below to its own exit code, so new errors
should subclass one of the four bases rather than ``Exception``.
"""

from __future__ import annotations


class DiagSymError(Exception):
    """Base class for every error raised by diagsym."""


# -- input / data model ------------------------------------------------


class TableError(DiagSymError, ValueError):
    """A count matrix failed validation."""


class NonSquare(TableError):
    pass


class NegativeEntry(TableError):
    pass


class EmptyTable(TableError):
    pass


class DimensionTooSmall(TableError):
    pass


class ParseError(DiagSymError, ValueError):
    """Malformed CSV input. Messages carry 1-based row/column coordinates."""


# -- fitting -----------------------------------------------------------


class DegenerateFit(DiagSymError):
    """A closed-form MLE is undefined for this table."""


class DegenerateBand(DegenerateFit):
    def __init__(self, k: int, upper: float, lower: float):
        self.k = k
        super().__init__(
            f"band k={k} has upper sum {upper:g} and lower sum {lower:g}; "
            "the DGS estimate needs both sides positive"
        )


class DegenerateTriangle(DegenerateFit):
    pass


# -- numerics ----------------------------------------------------------


class NumericalError(DiagSymError):
    """A statistic could not be evaluated on this input."""


class UndefinedStatistic(NumericalError):
    pass


class ZeroCell(NumericalError):
    pass


class SingularInformation(NumericalError):
    pass


class DomainError(DiagSymError, ValueError):
    """Argument outside the domain of a function."""


class RangeError(DiagSymError, ValueError):
    """Argument outside the range of the function being inverted."""


class ConfigError(DiagSymError, ValueError):
    """Inconsistent analysis configuration."""


# -- warnings ----------------------------------------------------------


class ZeroPairMass(UserWarning):
    """Some off-diagonal pair has pi_ij + pi_ji = 0; the entry is left NaN."""
