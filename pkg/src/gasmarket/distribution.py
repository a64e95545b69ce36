"""Wealth densities sampled on a uniform grid over [0, x_max].

Every functional here (norm, mean, entropy, L1 distance, pair-sum
convolution) is a trapezoid rule on the grid nodes, so that all the
operators built on top of them share a single error model.  Nothing is
renormalised behind the caller's back: a density that loses mass off the
end of the grid reports it through ``tail_mass`` or ``leakage``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import optimize, special

from .errors import DomainError, GridMismatchError, ParameterError

MIN_POINTS = 16
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform nodes ``x_i = i*h`` for ``i = 0..n-1`` with ``h = x_max/(n-1)``."""

    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_max) and self.x_max > 0):
            raise ParameterError(f"x_max must be positive, got {self.x_max}")
        if int(self.n) != self.n or self.n < MIN_POINTS:
            raise ParameterError(f"need at least {MIN_POINTS} grid points, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "x_max", float(self.x_max))

    @property
    def h(self) -> float:
        return self.x_max / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights; also the widths of the dual cells around each node."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def extended(self) -> "Grid":
        """Grid over [0, 2*x_max] with the same spacing (support of pair sums)."""
        return Grid(2.0 * self.x_max, 2 * self.n - 1)

    def index_of(self, value: float, tol: float = 1e-9) -> Optional[int]:
        """Node index at ``value`` if one sits there (relative tolerance), else None."""
        k = int(round(value / self.h))
        if 0 <= k < self.n and abs(k * self.h - value) <= tol * max(1.0, abs(value)):
            return k
        return None


@dataclass(frozen=True, eq=False)
class GridPdf:
    """Nonnegative density values on a :class:`Grid`.

    ``declared_norm`` is the trapezoid norm fixed at construction.
    ``tail_mass`` is the analytic mass beyond ``x_max`` for sampled families
    (None when unknown); ``leakage``/``mean_leakage`` hold the mass and first
    moment an operator pushed past ``x_max``.  ``signed`` admits negative
    values, which only the perturbed-kernel operator can produce.
    """

    grid: Grid
    values: np.ndarray
    tail_mass: Optional[float] = None
    leakage: float = 0.0
    mean_leakage: float = 0.0
    signed: bool = False
    declared_norm: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GridMismatchError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("density values must be finite")
        if not self.signed and np.any(v < 0):
            raise ParameterError(f"density values must be >= 0 (min {v.min():.3e})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "declared_norm", float(self.grid.weights @ v))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def scaled(self, factor: float) -> "GridPdf":
        return GridPdf(self.grid, factor * self.values, tail_mass=None, signed=self.signed)

    def normalized(self) -> "GridPdf":
        """Copy divided by its trapezoid norm, i.e. projected onto the unit sphere."""
        if self.declared_norm <= 0:
            raise ParameterError("cannot normalise a density with zero norm")
        return self.scaled(1.0 / self.declared_norm)


# --- families -------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ParameterError(f"rate must be positive, got {self.rate}")

    support = (0.0, math.inf)

    def profile(self, x):
        return self.rate * np.exp(-self.rate * x)

    def tail_mass(self, x_max):
        return math.exp(-self.rate * x_max)

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def entropy(self):
        return 1.0 - math.log(self.rate)


@dataclass(frozen=True)
class Gamma1:
    """The density x*exp(-x)."""

    support = (0.0, math.inf)

    def profile(self, x):
        return x * np.exp(-x)

    def tail_mass(self, x_max):
        return (1.0 + x_max) * math.exp(-x_max)

    mean = 2.0


@dataclass(frozen=True)
class Rectangular:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise ParameterError(f"need 0 <= lo < hi, got ({self.lo}, {self.hi})")

    @property
    def support(self):
        return (self.lo, self.hi)

    def profile(self, x):
        return np.full_like(np.asarray(x, dtype=float), 1.0 / (self.hi - self.lo))

    def tail_mass(self, x_max):
        return max(0.0, self.hi - max(self.lo, x_max)) / (self.hi - self.lo)

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def entropy(self):
        return math.log(self.hi - self.lo)


@dataclass(frozen=True)
class ParetoLike:
    """The infinite-mean density 1/(1+x)**2."""

    support = (0.0, math.inf)

    def profile(self, x):
        return 1.0 / (1.0 + x) ** 2

    def tail_mass(self, x_max):
        return 1.0 / (1.0 + x_max)

    mean = math.inf


@dataclass(frozen=True)
class TruncatedExponential:
    """``rate*exp(-rate*x)/(1-exp(-rate*cap))`` on [0, cap]."""

    rate: float
    cap: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ParameterError(f"rate must be positive, got {self.rate}")
        if not self.cap > 0:
            raise ParameterError(f"cap must be positive, got {self.cap}")

    @property
    def support(self):
        return (0.0, self.cap)

    @property
    def amplitude(self):
        return self.rate / -math.expm1(-self.rate * self.cap)

    def profile(self, x):
        return self.amplitude * np.exp(-self.rate * x)

    def tail_mass(self, x_max):
        return 0.0

    @property
    def mean(self):
        return truncated_exp_mean(self.rate, self.cap)

    @property
    def entropy(self):
        return -math.log(self.amplitude) + self.rate * self.mean


FamilySpec = Union[Exponential, Gamma1, Rectangular, ParetoLike, TruncatedExponential]


def truncated_exp_mean(rate: float, cap: float) -> float:
    """Mean ``1/a + cap/(1 - exp(a*cap))`` of the capped exponential, stable for small a*cap."""
    x = rate * cap
    if x < 1e-4:
        frac = 0.5 - x / 12.0 + x**3 / 720.0
    elif x > 700.0:
        frac = 1.0 / x
    else:
        frac = 1.0 / x - 1.0 / math.expm1(x)
    return cap * frac


def rate_for_mean(mean: float, cap: float) -> float:
    """Invert :func:`truncated_exp_mean` for the rate at fixed cap.

    Only means in (0, cap/2) correspond to a decreasing capped exponential.
    """
    if not (0 < mean < 0.5 * cap):
        raise ParameterError(f"mean {mean} must lie in (0, cap/2) for cap {cap}")
    lo = 1e-8 / cap
    hi = 64.0 / cap
    while truncated_exp_mean(hi, cap) > mean:
        hi *= 2.0
    if truncated_exp_mean(lo, cap) <= mean:
        return lo
    return optimize.brentq(
        lambda a: truncated_exp_mean(a, cap) - mean, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500
    )


def parse_family(text: str) -> FamilySpec:
    """Parse ``exp:1``, ``gamma1``, ``rect:2,4``, ``pareto`` or ``texp:a,cap``."""
    tag, _, rest = text.strip().partition(":")
    args = [float(a) for a in rest.split(",")] if rest else []
    tag = tag.lower()
    table = {
        "exp": (Exponential, 1),
        "gamma1": (Gamma1, 0),
        "rect": (Rectangular, 2),
        "pareto": (ParetoLike, 0),
        "texp": (TruncatedExponential, 2),
    }
    if tag not in table:
        raise ParameterError(f"unknown family {tag!r}")
    cls, nargs = table[tag]
    if len(args) != nargs:
        raise ParameterError(f"family {tag!r} takes {nargs} parameter(s), got {len(args)}")
    return cls(*args)


def _coverage(grid: Grid, lo: float, hi: float) -> np.ndarray:
    x = grid.x
    half = 0.5 * grid.h
    left = np.maximum(x - half, 0.0)
    right = np.minimum(x + half, grid.x_max)
    overlap = np.clip(np.minimum(right, hi) - np.maximum(left, lo), 0.0, None)
    return overlap / (right - left)


def make_pdf(spec: FamilySpec, grid: Grid) -> GridPdf:
    """Sample a family on ``grid``.

    Nodes whose dual cell straddles an edge of the support get the profile
    value times the covered fraction of the cell, so a jump that falls on a
    node takes half its height there.
    """
    if isinstance(spec, TruncatedExponential) and spec.cap > grid.x_max * (1 + 1e-12):
        raise ParameterError(f"cap {spec.cap} exceeds grid x_max {grid.x_max}")
    lo, hi = spec.support
    values = spec.profile(grid.x) * _coverage(grid, lo, hi)
    return GridPdf(grid, values, tail_mass=spec.tail_mass(grid.x_max))


def zero_pdf(grid: Grid) -> GridPdf:
    return GridPdf(grid, np.zeros(grid.n), tail_mass=0.0)


# --- functionals ----------------------------------------------------------


def norm(p: GridPdf) -> float:
    return float(p.grid.weights @ p.values)


def mean(p: GridPdf) -> float:
    return float(p.grid.weights @ (p.grid.x * p.values))


def entropy(p: GridPdf) -> float:
    """-int y ln y with the convention 0 ln 0 = 0."""
    return float(p.grid.weights @ special.entr(p.values))


def check_same_grid(p: GridPdf, q: GridPdf) -> None:
    if p.grid != q.grid:
        raise GridMismatchError(f"grid mismatch: {p.grid} vs {q.grid}")


def l1_distance(p: GridPdf, q: GridPdf) -> float:
    check_same_grid(p, q)
    return float(p.grid.weights @ np.abs(p.values - q.values))


def self_convolution(p: GridPdf) -> GridPdf:
    """Pair-sum density ``c(s) = int_0^s p(u) p(s-u) du`` on the extended grid.

    Trapezoid rule along each anti-diagonal; ``np.convolve`` is the direct
    O(n^2) sum, so results are deterministic for a given grid.
    """
    v = p.values
    n = v.size
    k = np.arange(2 * n - 1)
    lo = np.maximum(0, k - n + 1)
    hi = np.minimum(k, n - 1)
    c = p.grid.h * (np.convolve(v, v) - v[lo] * v[hi])
    if not p.signed:
        c = np.maximum(c, 0.0)
    return GridPdf(p.grid.extended(), c, tail_mass=0.0, signed=p.signed)


# --- CSV ------------------------------------------------------------------


def write_pdf_csv(p: GridPdf, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for xi, yi in zip(p.grid.x, p.values):
            w.writerow([repr(float(xi)), repr(float(yi))])


def read_pdf_csv(path: Union[str, Path]) -> GridPdf:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise ParameterError(f"{path}: expected header 'x,y'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    x, y = data[:, 0], data[:, 1]
    grid = Grid(x[-1], x.size)
    if np.max(np.abs(x - grid.x)) > 1e-9 * grid.x_max:
        raise DomainError(f"{path}: x column is not a uniform grid starting at 0")
    return GridPdf(grid, y, signed=bool(np.any(y < 0)))
