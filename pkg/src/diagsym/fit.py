"""Closed-form maximum likelihood fits for the symmetry family.

All five estimators keep the diagonal and the grand total of the
observed table.  S, CS and DPS redistribute each pair total
``n_ij + n_ji`` between its two cells; DGS and GS rescale the upper and
lower cells so that band (DGS) or triangle (GS) totals balance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBand, DegenerateTriangle
from .table import SquareTable, band_sums, pair_sums

__all__ = [
    "ModelId",
    "FittedModel",
    "fit_s",
    "fit_cs",
    "fit_dps",
    "fit_dgs",
    "fit_gs",
    "fit",
    "degrees_of_freedom",
]


class ModelId(str, enum.Enum):
    S = "S"
    CS = "CS"
    DPS = "DPS"
    DGS = "DGS"
    GS = "GS"

    def __str__(self) -> str:
        return self.value


def degrees_of_freedom(model: ModelId | str, r: int) -> int:
    """Residual degrees of freedom of ``model`` on an ``r x r`` table."""
    model = ModelId(model)
    if r < 2:
        raise ValueError("r must be at least 2")
    return {
        ModelId.S: r * (r - 1) // 2,
        ModelId.CS: r * (r - 1) // 2 - 1,
        ModelId.DPS: (r - 1) * (r - 2) // 2,
        ModelId.DGS: r - 1,
        ModelId.GS: 1,
    }[model]


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Expected frequencies under ``model``.

    ``dps_odds`` holds the fitted odds ``d_1..d_{r-1}`` for DPS and CS
    (CS repeats its single pooled value) and is ``None`` otherwise.
    Undefined odds are NaN; odds with an empty lower band are ``inf``.
    """

    model: ModelId
    fitted: np.ndarray
    df: int
    dps_odds: np.ndarray | None = None
    warnings: tuple[str, ...] = field(default=())

    @property
    def r(self) -> int:
        return self.fitted.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FittedModel):
            return NotImplemented
        if (self.dps_odds is None) != (other.dps_odds is None):
            return False
        same_odds = self.dps_odds is None or np.array_equal(
            self.dps_odds, other.dps_odds, equal_nan=True
        )
        return (
            self.model == other.model
            and self.df == other.df
            and self.warnings == other.warnings
            and same_odds
            and np.array_equal(self.fitted, other.fitted)
        )


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    return math.inf if num > 0 else math.nan


def _result(model, table, fitted, odds=None, notes=()):
    fitted = np.array(fitted, dtype=float)
    fitted.setflags(write=False)
    if odds is not None:
        odds = np.array(odds, dtype=float)
        odds.setflags(write=False)
    return FittedModel(
        model=model,
        fitted=fitted,
        df=degrees_of_freedom(model, table.r),
        dps_odds=odds,
        warnings=tuple(notes),
    )


def _split_pairs(t: np.ndarray, share: np.ndarray) -> np.ndarray:
    """Give the upper cell ``share[k]`` of each pair total at distance k."""
    r = t.shape[0]
    m = np.diag(np.diag(t) / 2.0)
    for k in range(1, r):
        idx = np.arange(r - k)
        pair = t[idx, idx + k]
        m[idx, idx + k] = share[k - 1] * pair
        m[idx + k, idx] = (1.0 - share[k - 1]) * pair
    return m


def fit_s(table: SquareTable) -> FittedModel:
    """Symmetry model: ``m_ij = (n_ij + n_ji) / 2``."""
    return _result(ModelId.S, table, pair_sums(table) / 2.0)


def fit_dps(table: SquareTable) -> FittedModel:
    """Diagonals-parameter symmetry model.

    Each pair total is split in proportion to its band totals,
    ``m_ij = n^U_k / (n^U_k + n^L_k) * (n_ij + n_ji)`` for ``i < j`` and
    the complementary share below the diagonal, with ``d_k = n^U_k / n^L_k``.

    A band with no off-diagonal mass gets zero fitted cells, an undefined
    odds (NaN) and a warning; degrees of freedom are not adjusted.
    """
    bands = band_sums(table)
    share = np.zeros(table.r - 1)
    odds = np.empty(table.r - 1)
    notes = []
    for k, (u, l) in enumerate(zip(bands.upper, bands.lower), start=1):
        tot = u + l
        share[k - 1] = u / tot if tot > 0 else 0.0
        odds[k - 1] = _ratio(u, l)
        if tot == 0:
            notes.append(f"DPS: band k={k} is empty; d_{k} undefined, fitted cells set to 0")
        elif l == 0:
            notes.append(f"DPS: band k={k} has empty lower side; d_{k} = inf")
    return _result(ModelId.DPS, table, _split_pairs(pair_sums(table), share), odds, notes)


def fit_cs(table: SquareTable) -> FittedModel:
    """Conditional symmetry: DPS with one pooled odds ``d = N^U / N^L``."""
    bands = band_sums(table)
    nu, nl = float(bands.upper.sum()), float(bands.lower.sum())
    tot = nu + nl
    notes = []
    if tot == 0:
        notes.append("CS: no off-diagonal mass; d undefined, fitted off-diagonal cells set to 0")
    elif nl == 0:
        notes.append("CS: lower triangle is empty; d = inf")
    share = np.full(table.r - 1, nu / tot if tot > 0 else 0.0)
    odds = np.full(table.r - 1, _ratio(nu, nl))
    return _result(ModelId.CS, table, _split_pairs(pair_sums(table), share), odds, notes)


def _scale_sides(n: np.ndarray, up_scale, lo_scale) -> np.ndarray:
    r = n.shape[0]
    m = np.array(n, dtype=float)
    for k in range(1, r):
        idx = np.arange(r - k)
        m[idx, idx + k] *= up_scale[k - 1]
        m[idx + k, idx] *= lo_scale[k - 1]
    return m


def fit_dgs(table: SquareTable) -> FittedModel:
    """Distance global symmetry model.

    Upper cells at distance k are scaled by ``(n^U_k + n^L_k) / (2 n^U_k)``
    and lower cells by ``(n^U_k + n^L_k) / (2 n^L_k)``, which equalises the
    two band totals while keeping their sum.

    Raises
    ------
    DegenerateBand
        If a band with positive mass has one side empty.
    """
    bands = band_sums(table)
    up = np.zeros(table.r - 1)
    lo = np.zeros(table.r - 1)
    for k, (u, l) in enumerate(zip(bands.upper, bands.lower), start=1):
        if u + l == 0:
            continue
        if u == 0 or l == 0:
            raise DegenerateBand(k, u, l)
        up[k - 1] = (u + l) / (2.0 * u)
        lo[k - 1] = (u + l) / (2.0 * l)
    return _result(ModelId.DGS, table, _scale_sides(table.counts, up, lo))


def fit_gs(table: SquareTable) -> FittedModel:
    """Global symmetry: one pooled version of the DGS rescaling."""
    bands = band_sums(table)
    nu, nl = float(bands.upper.sum()), float(bands.lower.sum())
    if nu + nl == 0:
        up = lo = 0.0
    elif nu == 0 or nl == 0:
        raise DegenerateTriangle(
            f"upper triangle total {nu:g}, lower triangle total {nl:g}; "
            "the GS estimate needs both positive"
        )
    else:
        up, lo = (nu + nl) / (2.0 * nu), (nu + nl) / (2.0 * nl)
    r = table.r
    m = _scale_sides(table.counts, np.full(r - 1, up), np.full(r - 1, lo))
    return _result(ModelId.GS, table, m)


_FITTERS = {
    ModelId.S: fit_s,
    ModelId.CS: fit_cs,
    ModelId.DPS: fit_dps,
    ModelId.DGS: fit_dgs,
    ModelId.GS: fit_gs,
}


def fit(table: SquareTable, model: ModelId | str) -> FittedModel:
    return _FITTERS[ModelId(model)](table)
