"""Square contingency tables and the band / pair aggregations built on them.

Cells are indexed ``(i, j)`` with ``i`` the row (first measurement) and
``j`` the column (second measurement).  The band at distance ``k`` above
the diagonal is the set of cells with ``j - i = k``; the matching lower
band holds the transposed cells.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionTooSmall,
    EmptyTable,
    NegativeEntry,
    NonSquare,
    TableError,
    ZeroPairMass,
)

__all__ = [
    "SquareTable",
    "ProbTable",
    "BandSums",
    "new_table",
    "band_sums",
    "pair_sums",
    "to_probabilities",
    "conditional_symmetric",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SquareTable:
    """Validated ``r x r`` table of nonnegative (possibly fractional) counts.

    Build instances with :func:`new_table`; the constructor does no
    validation of its own.
    """

    counts: np.ndarray
    labels: tuple[str, ...]

    @property
    def r(self) -> int:
        return self.counts.shape[0]

    @property
    def n(self) -> float:
        return float(self.counts.sum())

    def transpose(self) -> "SquareTable":
        return SquareTable(_frozen(self.counts.T), self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SquareTable):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    def __repr__(self) -> str:
        return f"SquareTable(r={self.r}, n={self.n:g}, labels={self.labels!r})"


@dataclass(frozen=True, eq=False)
class ProbTable:
    """Cell probabilities summing to one."""

    probs: np.ndarray

    @property
    def r(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def from_array(cls, probs) -> "ProbTable":
        p = np.asarray(probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise NonSquare(f"expected a square matrix, got shape {p.shape}")
        if np.any(p < 0):
            raise NegativeEntry("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise TableError(f"probabilities sum to {p.sum()!r}, not 1")
        return cls(_frozen(p))


@dataclass(frozen=True)
class BandSums:
    """Per-distance band totals, ``upper[k-1]`` and ``lower[k-1]`` for k = 1..r-1."""

    upper: np.ndarray
    lower: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.upper + self.lower


def new_table(counts, labels: Sequence[str] | None = None) -> SquareTable:
    """Validate ``counts`` and wrap it as an immutable :class:`SquareTable`.

    Raises
    ------
    NonSquare, DimensionTooSmall, NegativeEntry, EmptyTable
    """
    a = np.asarray(counts, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    r = a.shape[0]
    if r < 2:
        raise DimensionTooSmall(f"table dimension must be at least 2, got {r}")
    if not np.all(np.isfinite(a)):
        raise TableError("counts must be finite")
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise NegativeEntry(f"negative count {a[i, j]:g} at cell ({i + 1}, {j + 1})")
    if not np.any(a > 0):
        raise EmptyTable("all counts are zero")
    if labels is None:
        labels = tuple(str(i + 1) for i in range(r))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != r:
            raise TableError(f"expected {r} labels, got {len(labels)}")
    return SquareTable(_frozen(a), labels)


def _bands(a: np.ndarray) -> BandSums:
    r = a.shape[0]
    upper = np.array([np.trace(a, offset=k) for k in range(1, r)])
    lower = np.array([np.trace(a, offset=-k) for k in range(1, r)])
    return BandSums(upper, lower)


def band_sums(table: SquareTable | np.ndarray) -> BandSums:
    """Return the upper and lower band totals for distances 1..r-1.

    Also accepts a bare matrix so the same helper serves probability
    tables and fitted frequencies.
    """
    a = table.counts if isinstance(table, SquareTable) else np.asarray(table, float)
    return _bands(a)


def pair_sums(table: SquareTable | np.ndarray) -> np.ndarray:
    """Symmetric matrix ``t_ij = n_ij + n_ji``; the diagonal is ``2 n_ii``."""
    a = table.counts if isinstance(table, SquareTable) else np.asarray(table, float)
    return a + a.T


def to_probabilities(table: SquareTable) -> ProbTable:
    return ProbTable(_frozen(table.counts / table.n))


def conditional_symmetric(probs: ProbTable | np.ndarray) -> np.ndarray:
    """Conditional probabilities ``pi_ij / (pi_ij + pi_ji)``.

    Off-diagonal pairs with zero total mass are left as NaN and a
    :class:`ZeroPairMass` warning is emitted.  The diagonal is always 1/2.
    """
    p = probs.probs if isinstance(probs, ProbTable) else np.asarray(probs, float)
    t = p + p.T
    off = ~np.eye(p.shape[0], dtype=bool)
    empty = (t == 0) & off
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(t > 0, p / np.where(t > 0, t, 1.0), np.nan)
    np.fill_diagonal(c, 0.5)
    if empty.any():
        cells = [(i + 1, j + 1) for i, j in np.argwhere(np.triu(empty))]
        warnings.warn(
            f"zero pair mass at {cells}; conditional probabilities undefined there",
            ZeroPairMass,
            stacklevel=2,
        )
    return c
