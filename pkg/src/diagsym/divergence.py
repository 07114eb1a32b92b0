"""f-divergence families and the diagonal-parameter contrasts they induce.

Four convex generators are supported::

    kl        f(x) = x log x
    rkl       f(x) = -log x
    pearson   f(x) = (1 - x)^2
    power     f(x) = (x^(lam+1) - x) / (lam (lam + 1)),  lam not in {0, -1}

For a pair of cells with conditional probabilities ``c`` and ``1 - c``
the model contrast is ``F(2c) - F(2(1 - c))`` with ``F = f'``.  Written
as a function of the odds ``x = c / (1 - c)`` this is the strictly
increasing map :func:`g_transform`, so a band-constant contrast and a
band-constant odds are the same statement for every family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError
from .table import ProbTable, conditional_symmetric

__all__ = [
    "DivergenceFamily",
    "DivergenceParameters",
    "KL",
    "REVERSE_KL",
    "PEARSON",
    "power",
    "f_eval",
    "big_f",
    "big_f_inv",
    "g_transform",
    "g_inverse",
    "dps_parameter",
    "dps_parameters",
    "f_divergence",
    "band_contrasts",
]

_TAGS = ("kl", "rkl", "pearson", "power")


@dataclass(frozen=True)
class DivergenceFamily:
    tag: str
    lam: float | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown divergence family {self.tag!r}")
        if self.tag == "power":
            lam = self.lam
            if lam is None or not math.isfinite(lam) or lam == 0 or lam == -1:
                raise ValueError(
                    f"power family needs a finite lambda other than 0 and -1, got {lam!r}"
                )
            object.__setattr__(self, "lam", float(lam))
        elif self.lam is not None:
            raise ValueError(f"{self.tag} takes no lambda")

    @property
    def name(self) -> str:
        if self.tag == "power":
            return f"power({self.lam:g})"
        return self.tag

    # Vectorised f, F = f', F^-1 without domain checks; public wrappers
    # below validate scalars.

    def _f(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.tag == "kl":
                return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
            if self.tag == "rkl":
                return -np.log(x)
            if self.tag == "pearson":
                return (1.0 - x) ** 2
            lam = self.lam
            return (x ** (lam + 1.0) - x) / (lam * (lam + 1.0))

    def _F(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.tag == "kl":
                return np.log(x) + 1.0
            if self.tag == "rkl":
                return -1.0 / x
            if self.tag == "pearson":
                return 2.0 * (x - 1.0)
            lam = self.lam
            return x**lam / lam - 1.0 / (lam * (lam + 1.0))

    def _F_inv(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.tag == "kl":
                return np.exp(y - 1.0)
            if self.tag == "rkl":
                return -1.0 / y
            if self.tag == "pearson":
                return y / 2.0 + 1.0
            lam = self.lam
            return (lam * (y + 1.0 / (lam * (lam + 1.0)))) ** (1.0 / lam)

    def _in_f_range(self, y: float) -> bool:
        if self.tag == "kl":
            return math.isfinite(y)
        if self.tag == "rkl":
            return y < 0
        if self.tag == "pearson":
            return y > -2.0
        lam = self.lam
        return lam * (y + 1.0 / (lam * (lam + 1.0))) > 0

    def _slope_at_infinity(self) -> float:
        """``lim f(t)/t`` as ``t -> inf``, used for mass against a zero reference."""
        if self.tag in ("kl", "pearson"):
            return math.inf
        if self.tag == "rkl":
            return 0.0
        lam = self.lam
        return math.inf if lam > 0 else -1.0 / (lam * (lam + 1.0))


KL = DivergenceFamily("kl")
REVERSE_KL = DivergenceFamily("rkl")
PEARSON = DivergenceFamily("pearson")


def power(lam: float) -> DivergenceFamily:
    return DivergenceFamily("power", lam)


@dataclass(frozen=True, eq=False)
class DivergenceParameters:
    """Per-band contrasts ``d_1^f .. d_{r-1}^f`` for one family (NaN = undefined)."""

    family: DivergenceFamily
    values: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DivergenceParameters):
            return NotImplemented
        return self.family == other.family and np.array_equal(
            self.values, other.values, equal_nan=True
        )


def f_eval(family: DivergenceFamily, x: float) -> float:
    """Evaluate the generator ``f``; ``x = 0`` returns ``lim_{t->0} f(t)``."""
    if x < 0:
        raise DomainError(f"f is defined for x >= 0, got {x!r}")
    if x == 0:
        if family.tag == "kl":
            return 0.0
        if family.tag == "rkl":
            return math.inf
        if family.tag == "pearson":
            return 1.0
        lam = family.lam
        return 0.0 if lam > -1 else math.inf
    return float(family._f(x))


def big_f(family: DivergenceFamily, x: float) -> float:
    """``F = f'`` at ``x > 0``."""
    if not x > 0:
        raise DomainError(f"F is defined for x > 0, got {x!r}")
    return float(family._F(x))


def big_f_inv(family: DivergenceFamily, y: float) -> float:
    """Inverse of :func:`big_f` onto the positive reals."""
    if not family._in_f_range(y):
        raise RangeError(f"{y!r} is outside the range of F for {family.name}")
    return float(family._F_inv(y))


def _g(family: DivergenceFamily, x):
    x = np.asarray(x, dtype=float)
    return family._F(2.0 * x / (1.0 + x)) - family._F(2.0 / (1.0 + x))


def g_transform(family: DivergenceFamily, x: float) -> float:
    """``G(x) = F(2x/(1+x)) - F(2/(1+x))``: the contrast of a pair with odds ``x``."""
    if not x > 0:
        raise DomainError(f"G is defined for x > 0, got {x!r}")
    if not math.isfinite(x):
        raise DomainError("G needs a finite argument")
    return float(_g(family, x))


_BRACKET_LIMIT = 1e300


def g_inverse(family: DivergenceFamily, a: float) -> float:
    """Solve ``G(x) = a`` for ``x > 0`` by bracketed bisection.

    The bracket starts at ``[1e-12, 1e12]`` and grows geometrically.
    ``RangeError`` is raised when ``a`` lies outside the range of G
    (Pearson and positive-lambda power families have a bounded G).
    """
    if not math.isfinite(a):
        raise RangeError(f"G^-1 needs a finite argument, got {a!r}")
    if a == 0:
        return 1.0
    lo, hi = 1e-12, 1e12
    while g_transform(family, lo) > a:
        lo *= 1e-12
        if lo < 1.0 / _BRACKET_LIMIT:
            raise RangeError(f"{a!r} is below the range of G for {family.name}")
    while g_transform(family, hi) < a:
        hi *= 1e12
        if hi > _BRACKET_LIMIT:
            raise RangeError(f"{a!r} is above the range of G for {family.name}")
    # Geometric midpoints until the bracket is within a factor of 2,
    # then arithmetic ones down to adjacent floats.
    while True:
        mid = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g_transform(family, mid) < a:
            lo = mid
        else:
            hi = mid
    glo, ghi = g_transform(family, lo), g_transform(family, hi)
    return lo if abs(glo - a) <= abs(ghi - a) else hi


def dps_parameter(d: float, family: DivergenceFamily) -> float:
    """Contrast implied by a DPS odds ``d`` under ``family``.

    ``kl`` returns the odds itself; ``rkl`` returns ``1/c_ij - 1/c_ji``;
    ``pearson`` returns ``c_ij - c_ji``; ``power`` returns
    ``c_ij**lam - c_ji**lam``, with ``c_ij = d/(1+d)``, ``c_ji = 1/(1+d)``.
    NaN propagates.
    """
    if math.isnan(d):
        return math.nan
    if not d > 0:
        raise DomainError(f"d must be positive, got {d!r}")
    if family.tag == "kl":
        return d
    if math.isinf(d):
        # c_ij -> 1, c_ji -> 0
        if family.tag == "rkl":
            return -math.inf
        if family.tag == "pearson":
            return 1.0
        return 1.0 if family.lam > 0 else -math.inf
    if family.tag == "rkl":
        return (1.0 - d * d) / d
    if family.tag == "pearson":
        return (d - 1.0) / (1.0 + d)
    lam = family.lam
    return (d**lam - 1.0) / (1.0 + d) ** lam


def dps_parameters(odds, family: DivergenceFamily) -> DivergenceParameters:
    values = np.array([dps_parameter(float(d), family) for d in odds])
    values.setflags(write=False)
    return DivergenceParameters(family, values)


def _as_array(p) -> np.ndarray:
    return p.probs if isinstance(p, ProbTable) else np.asarray(p, dtype=float)


def f_divergence(probs, reference, family: DivergenceFamily) -> float:
    """``sum_ij ref_ij * f(p_ij / ref_ij)``.

    Cells with ``p = ref = 0`` contribute nothing.  A cell with
    ``ref = 0 < p`` contributes ``p * lim f(t)/t``, which is ``inf`` for
    KL and Pearson.  The result may be ``inf`` but is never an error.
    """
    p, q = _as_array(probs), _as_array(reference)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q.shape}")
    total = 0.0
    pos = q > 0
    if pos.any():
        ratio = p[pos] / q[pos]
        zero = ratio == 0
        terms = np.empty_like(ratio)
        terms[~zero] = q[pos][~zero] * family._f(ratio[~zero])
        f0 = f_eval(family, 0.0)
        terms[zero] = q[pos][zero] * f0 if math.isfinite(f0) else math.inf
        total += float(terms.sum())
    stray = p[~pos]
    stray = stray[stray > 0]
    if stray.size:
        slope = family._slope_at_infinity()
        total += math.inf if math.isinf(slope) else slope * float(stray.sum())
    return total


def band_contrasts(probs, family: DivergenceFamily) -> np.ndarray:
    """Matrix of ``F(2 c_ij) - F(2 c_ji)``; antisymmetric, zero on the diagonal.

    Undefined conditional probabilities give NaN entries.
    """
    c = conditional_symmetric(_as_array(probs))
    with np.errstate(divide="ignore", invalid="ignore"):
        fc = family._F(2.0 * c)
        out = fc - fc.T
    np.fill_diagonal(out, 0.0)
    return out
