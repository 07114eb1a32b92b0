"""Goodness-of-fit statistics and the S = DPS + DGS partition.

Cells are vectorised row-major, ``(1,1), (1,2), ..., (r,r)``, matching
the ordering of the log-linear design below.

Design matrix ``X`` (``r^2 x K`` with ``K = (r-1) + r(r+1)/2``) has one
indicator column per upper band distance followed by one column per
symmetric pair ``{(i,j), (j,i)}``, ``i <= j``.  DPS holds iff
``log(pi)`` lies in its column span, so ``h1 = U' log p`` with ``U`` an
orthonormal basis of the orthogonal complement.  DGS is the linear
constraint ``h2 = M p`` where row ``l`` of ``M`` is +1 on upper band
``l`` and -1 on lower band ``l``.  Because ``M'`` and the all-ones vector
lie in ``span(X)``, the cross-covariance between ``h1`` and ``h2`` under
``Sigma = diag(p) - p p'`` vanishes and the Wald statistics add.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .errors import DomainError, SingularInformation, UndefinedStatistic, ZeroCell
from .fit import (
    FittedModel,
    ModelId,
    degrees_of_freedom,
    fit_dgs,
    fit_dps,
    fit_s,
)
from .table import SquareTable

__all__ = [
    "StatKind",
    "TestResult",
    "DesignMatrices",
    "PartitionReport",
    "g2",
    "degrees_of_freedom",
    "chi_square_sf",
    "build_design_matrices",
    "multinomial_covariance",
    "constraints",
    "wald",
    "partition",
]

# Inner matrices with a larger condition number are treated as singular.
MAX_CONDITION = 1e12


class StatKind(str, enum.Enum):
    G2 = "G2"
    WALD = "Wald"

    def __str__(self) -> str:
        return self.value


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail ``P(chi2_df > x)`` as the regularized upper incomplete gamma ``Q(df/2, x/2)``."""
    if df < 1 or int(df) != df:
        raise DomainError(f"df must be a positive integer, got {df!r}")
    if not x >= 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if math.isinf(x):
        return 0.0
    return float(scipy.special.gammaincc(0.5 * df, 0.5 * x))


def _p_value(value: float, df: int) -> float:
    # A saturated model (df = 0) has nothing to test.
    if df == 0:
        return 1.0
    return chi_square_sf(value, df)


@dataclass(frozen=True)
class TestResult:
    model: ModelId
    kind: StatKind
    value: float
    df: int
    p_value: float

    __test__ = False  # keep pytest from collecting this as a test class

    @classmethod
    def make(cls, model, kind, value: float, df: int) -> "TestResult":
        value = max(float(value), 0.0)
        return cls(ModelId(model), StatKind(kind), value, int(df), _p_value(value, df))


def g2(table: SquareTable, fitted: FittedModel) -> TestResult:
    """Likelihood-ratio statistic ``2 sum n_ij log(n_ij / m_ij)``.

    Empty observed cells contribute zero.

    Raises
    ------
    UndefinedStatistic
        If a positive observed cell has a fitted value of zero.
    """
    n = table.counts
    m = fitted.fitted
    if n.shape != m.shape:
        raise ValueError("fitted model does not match table dimension")
    pos = n > 0
    if np.any(m[pos] <= 0):
        i, j = np.argwhere(pos & (m <= 0))[0]
        raise UndefinedStatistic(
            f"{fitted.model}: observed count {n[i, j]:g} at cell ({i + 1}, {j + 1}) "
            "has fitted value 0"
        )
    value = 2.0 * float(np.sum(n[pos] * np.log(n[pos] / m[pos])))
    return TestResult.make(fitted.model, StatKind.G2, value, fitted.df)


@dataclass(frozen=True, eq=False)
class DesignMatrices:
    """``X`` (DPS log-linear design), ``U`` (orthonormal complement), ``M`` (DGS constraints)."""

    r: int
    X: np.ndarray
    U: np.ndarray
    M: np.ndarray

    def with_basis(self, U: np.ndarray) -> "DesignMatrices":
        """Same design with a different complement basis (must span the same space)."""
        return DesignMatrices(self.r, self.X, np.asarray(U, dtype=float), self.M)


def _cell(r: int, i: int, j: int) -> int:
    return i * r + j


def build_design_matrices(r: int) -> DesignMatrices:
    if r < 2:
        raise DomainError(f"r must be at least 2, got {r}")
    cols = []
    # x_l: w_{l+1}, ..., w_r stacked, then zeros -> ones on upper band l
    band_cols = []
    for l in range(1, r):
        x = np.zeros(r * r)
        for i in range(r - l):
            x[_cell(r, i, i + l)] = 1.0
        band_cols.append(x)
    cols.extend(band_cols)
    pair_cols = {}
    for i in range(r):
        for j in range(i, r):
            x = np.zeros(r * r)
            x[_cell(r, i, j)] = 1.0
            x[_cell(r, j, i)] = 1.0
            pair_cols[i, j] = x
            cols.append(x)
    X = np.column_stack(cols)
    U = scipy.linalg.null_space(X.T)
    M = np.empty((r - 1, r * r))
    for l in range(1, r):
        g = 2.0 * band_cols[l - 1]
        for i in range(r - l):
            g = g - pair_cols[i, i + l]
        M[l - 1] = g
    return DesignMatrices(r, X, U, M)


def multinomial_covariance(p: np.ndarray) -> np.ndarray:
    """``diag(p) - p p'`` for a probability vector."""
    p = np.asarray(p, dtype=float).ravel()
    return np.diag(p) - np.outer(p, p)


def constraints(design: DesignMatrices, p: np.ndarray, model: ModelId | str):
    """Constraint vector ``h(p)`` and Jacobian ``H(p)`` for S, DPS or DGS."""
    model = ModelId(model)
    p = np.asarray(p, dtype=float).ravel()
    if model is ModelId.DPS:
        return design.U.T @ np.log(p), design.U.T / p
    if model is ModelId.DGS:
        return design.M @ p, design.M
    if model is ModelId.S:
        h1, H1 = constraints(design, p, ModelId.DPS)
        h2, H2 = constraints(design, p, ModelId.DGS)
        return np.concatenate([h1, h2]), np.vstack([H1, H2])
    raise ValueError(f"no Wald statistic is defined for model {model}")


def wald(
    table: SquareTable,
    model: ModelId | str,
    design: DesignMatrices | None = None,
) -> TestResult:
    """Wald statistic ``n h' (H Sigma H')^{-1} h`` at the sample proportions.

    Raises
    ------
    ZeroCell
        If any observed proportion is zero.
    SingularInformation
        If the inner matrix has condition number above ``MAX_CONDITION``.
    """
    model = ModelId(model)
    if model not in (ModelId.S, ModelId.DPS, ModelId.DGS):
        raise ValueError(f"no Wald statistic is defined for model {model}")
    if np.any(table.counts <= 0):
        i, j = np.argwhere(table.counts <= 0)[0]
        raise ZeroCell(
            f"Wald statistic needs all cells positive; cell ({i + 1}, {j + 1}) is zero "
            "(consider --smooth)"
        )
    if design is None:
        design = build_design_matrices(table.r)
    elif design.r != table.r:
        raise ValueError("design matrices do not match table dimension")
    n = table.n
    p = (table.counts / n).ravel()
    df = degrees_of_freedom(model, table.r)
    h, H = constraints(design, p, model)
    if h.size == 0:
        return TestResult.make(model, StatKind.WALD, 0.0, df)
    inner = H @ multinomial_covariance(p) @ H.T
    cond = np.linalg.cond(inner)
    if not cond <= MAX_CONDITION:
        raise SingularInformation(
            f"{model}: inner covariance matrix has condition number {cond:.3g}"
        )
    value = n * float(h @ np.linalg.solve(inner, h))
    return TestResult.make(model, StatKind.WALD, value, df)


@dataclass(frozen=True)
class PartitionReport:
    s: TestResult
    dps: TestResult
    dgs: TestResult
    residual: float
    df_check: bool

    def additive(self, tolerance: float = 1e-8) -> bool:
        return self.residual <= tolerance * max(1.0, self.s.value)


def partition(
    table: SquareTable,
    kind: StatKind | str,
    design: DesignMatrices | None = None,
) -> PartitionReport:
    """Evaluate S, DPS and DGS with one statistic and check that they add up."""
    kind = StatKind(kind)
    if kind is StatKind.G2:
        s = g2(table, fit_s(table))
        dps = g2(table, fit_dps(table))
        dgs = g2(table, fit_dgs(table))
    else:
        design = design or build_design_matrices(table.r)
        s, dps, dgs = (wald(table, m, design) for m in (ModelId.S, ModelId.DPS, ModelId.DGS))
    r = table.r
    df_check = s.df == dps.df + dgs.df == r * (r - 1) // 2
    residual = abs(s.value - dps.value - dgs.value)
    return PartitionReport(s, dps, dgs, residual, df_check)
