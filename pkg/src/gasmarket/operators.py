"""Evolution operators acting on grid densities.

All four maps share one construction.  The pair-sum density ``c`` from
:func:`~gasmarket.distribution.self_convolution` is redistributed over
``x in [0, s]`` for every pair total ``s``:

* ``T``      uniform split, ``Tp(x) = int_{s>x} c(s)/s ds``;
* ``T_lam``  ``(1-lam) p + lam T p``;
* ``T_cap``  only pairs with ``s <= cap`` trade, the rest keep their money;
* ``T_K``    split law ``sum_n (n+1) a_n x^n / s^(n+1)``.

Outputs are truncated at the input grid's ``x_max``; the mass and first
moment that fall beyond it are attached as ``leakage``/``mean_leakage`` so
the conservation laws stay checkable on a finite domain.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distribution import Grid, GridPdf, self_convolution
from .errors import DomainError, ParameterError, UnsupportedOrderError
from .specfun import ei

_CONSTRAINT_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


class KernelPositivityWarning(UserWarning):
    """A perturbed-kernel iterate went negative somewhere on the grid."""


@dataclass(frozen=True)
class KernelCoefficients:
    """Coefficients ``a_0..a_N`` of ``K = sum (n+1) a_n (x/(u+v))^n``."""

    coeffs: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.coeffs)
        if not a:
            raise ParameterError("kernel needs at least a_0")
        object.__setattr__(self, "coeffs", a)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def mass_factor(self) -> float:
        """``sum a_n``: the norm of ``T_K p`` is ``norm(p)**2`` times this."""
        return math.fsum(self.coeffs)

    @property
    def wealth_factor(self) -> float:
        """``sum (n+1)/(n+2) a_n``; the mean scales by twice this."""
        return math.fsum((n + 1) / (n + 2) * a for n, a in enumerate(self.coeffs))

    @property
    def conservative(self) -> bool:
        return abs(self.mass_factor - 1.0) <= _CONSTRAINT_TOL and abs(self.wealth_factor - 0.5) <= _CONSTRAINT_TOL


@dataclass(frozen=True)
class OperatorParams:
    """Selects ``(1-lam) I + lam B`` with ``B`` one of T, T_cap or T_K."""

    lam: float = 1.0
    cap: Optional[float] = None
    kernel: Optional[KernelCoefficients] = None

    def __post_init__(self):
        _check_lambda(self.lam)
        if self.cap is not None and self.kernel is not None:
            raise ParameterError("cap and kernel select different models; set at most one")
        if self.cap is not None and not self.cap > 0:
            raise ParameterError(f"cap must be positive, got {self.cap}")


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ParameterError(f"lambda must lie in [0, 1], got {lam}")


def tail_trapz(g: np.ndarray, h: float) -> np.ndarray:
    """``F_i = int_{x_i}^{x_end} g`` by the trapezoid rule, for every node."""
    seg = 0.5 * h * (g[:-1] + g[1:])
    out = np.zeros_like(g)
    out[:-1] = np.cumsum(seg[::-1])[::-1]
    return out


def _split_density(c: np.ndarray, p0: float, s: np.ndarray) -> np.ndarray:
    # c(s)/s -> p(0)^2 as s -> 0 for a density continuous at the origin
    g = np.empty_like(c)
    g[0] = p0 * p0
    g[1:] = c[1:] / s[1:]
    return g


def _truncate(ext: np.ndarray, p: GridPdf, signed: bool = False) -> GridPdf:
    n = p.grid.n
    h = p.grid.h
    tail = ext[n - 1 :]
    tx = np.arange(n - 1, ext.size) * h
    tw = np.full(tail.size, h)
    tw[0] = tw[-1] = 0.5 * h
    return GridPdf(
        p.grid,
        ext[:n],
        leakage=float(tw @ tail),
        mean_leakage=float(tw @ (tx * tail)),
        signed=signed,
    )


def _uniform_split_ext(p: GridPdf, c: np.ndarray) -> np.ndarray:
    s = p.grid.extended().x
    return tail_trapz(_split_density(c, p.values[0], s), p.grid.h)


def apply_T(p: GridPdf) -> GridPdf:
    """One step of the random-exchange gas: ``Tp(x) = int int_{u+v>x} p(u)p(v)/(u+v)``."""
    c = self_convolution(p).values
    return _truncate(_uniform_split_ext(p, c), p, signed=p.signed)


def apply_T_lambda(p: GridPdf, lam: float) -> GridPdf:
    _check_lambda(lam)
    if lam == 0.0:
        return p
    tp = apply_T(p)
    if lam == 1.0:
        return tp
    return GridPdf(
        p.grid,
        (1.0 - lam) * p.values + lam * tp.values,
        leakage=lam * tp.leakage,
        mean_leakage=lam * tp.mean_leakage,
        signed=p.signed,
    )


def apply_T_cap(p: GridPdf, cap: float) -> GridPdf:
    """Richness-capped exchange: pairs with ``u+v > cap`` are refused.

    The grid must carry a node at ``cap`` (``x_max = cap`` is the natural
    choice) and ``p`` must vanish beyond it.  Because ``cap - x_i`` is then
    itself a node, the frozen-trade term needs no interpolation.
    """
    if not cap > 0:
        raise ParameterError(f"cap must be positive, got {cap}")
    last = p.grid.index_of(cap)
    if last is None:
        raise DomainError(f"cap {cap} is not a node of grid (x_max={p.grid.x_max}, n={p.grid.n})")
    if np.any(p.values[last + 1 :] != 0.0):
        raise DomainError(f"density has support beyond the cap {cap}")
    if last + 1 < 16:
        raise DomainError("cap leaves fewer than 16 grid nodes")
    h = p.grid.h
    sub = GridPdf(Grid(last * h, last + 1), p.values[: last + 1])
    q = sub.values
    c = self_convolution(sub).values[: last + 1]
    traded = tail_trapz(_split_density(c, q[0], sub.x), h)
    kept = q * tail_trapz(q, h)[::-1]
    # Boundary node at the cap: pairs summing exactly to the cap are split
    # between the traded and frozen terms.  This term makes the discrete
    # norm and mean laws hold to rounding for any array.
    kept[-1] += 0.5 * h * (c[-1] / sub.x[-1] - q[0] * q[-1])
    out = np.zeros(p.grid.n)
    out[: last + 1] = traded + kept
    return GridPdf(p.grid, out)


def solve_kernel_coeffs(order: int, kernel_epsilon: float = 0.0) -> KernelCoefficients:
    """Conservative kernel coefficients for order 1 (unique) or 2 (one-parameter family)."""
    if order == 1:
        return KernelCoefficients((1.0, 0.0))
    if order == 2:
        e = float(kernel_epsilon)
        return KernelCoefficients((1.0 - e / 3.0, e, 0.0 - 2.0 * e / 3.0))
    raise UnsupportedOrderError(f"kernel order {order} not supported (only 1 and 2 have closed-form solutions)")


def _hat_moments(s: np.ndarray, h: float, power: int):
    """Integrals of the linear hat at node k against ``s**-power``.

    Returns (left, right) halves.  left[1] would diverge for power >= 2 and
    is only ever multiplied by x_0 = 0, so it is left at zero.
    """
    m = s.size
    left = np.zeros(m)
    right = np.zeros(m)
    a = s[1:-1, None] + _GL_T[None, :] * h  # interval [s_k, s_{k+1}] for k = 1..m-2
    right[1:-1] = h * ((1.0 - _GL_T) * a ** (-power)) @ _GL_W
    left[2:] = h * (_GL_T * a ** (-power)) @ _GL_W  # same intervals, seen from node k+1
    return left, right


def _kernel_perturbation(p: GridPdf, c: np.ndarray, k: KernelCoefficients, pair_mass: float) -> np.ndarray:
    """Contribution of the ``n >= 1`` kernel terms on the extended grid.

    Product integration: ``c`` is linear between nodes and ``s**-(n+1)`` is
    integrated exactly against it, which keeps the values accurate down to
    ``x = h`` where a plain trapezoid in ``s`` is O(h) off.  These terms
    behave like ``x ln x`` at the origin, so the trapezoid panel ``[0, h]``
    undercounts their mass; the ``x = 0`` node absorbs that defect so the
    total mass is exactly ``pair_mass * sum_{n>=1} a_n``.  The first moment
    is unaffected by the ``x = 0`` node.
    """
    ext = p.grid.extended()
    s = ext.x
    h = ext.h
    raw = np.zeros(s.size)
    mass_target = 0.0
    for n, a in enumerate(k.coeffs):
        if n == 0 or a == 0.0:
            continue
        mass_target += a
        left, right = _hat_moments(s, h, n + 1)
        cl = np.cumsum((c * left)[::-1])[::-1]
        cr = np.cumsum((c * right)[::-1])[::-1]
        acc = cr.copy()
        acc[:-1] += cl[1:]
        raw += (n + 1) * a * s**n * acc
    w = ext.weights
    raw[0] += (mass_target * pair_mass - w @ raw) / w[0]
    return raw


def apply_T_kernel(p: GridPdf, k: KernelCoefficients) -> GridPdf:
    """Perturbed exchange ``(T_K p)(x) = int_{s>x} K(s, x) c(s)/s ds``.

    With ``k = (1, 0, ...)`` this runs exactly the :func:`apply_T` path.
    Negative output values are allowed but trigger
    :class:`KernelPositivityWarning`.
    """
    c = self_convolution(p).values
    uniform = _uniform_split_ext(p, c)
    a0 = k.coeffs[0]
    ext = uniform if a0 == 1.0 else a0 * uniform
    if any(a != 0.0 for a in k.coeffs[1:]):
        pair_mass = float(p.grid.extended().weights @ uniform)
        ext = ext + _kernel_perturbation(p, c, k, pair_mass)
    scale = np.max(np.abs(ext)) if ext.size else 0.0
    neg = ext.min() < -1e-14 * scale
    if not neg:
        ext = np.maximum(ext, 0.0) if not p.signed else ext
    else:
        warnings.warn(
            f"perturbed kernel produced negative density values (min {ext.min():.3e})",
            KernelPositivityWarning,
            stacklevel=2,
        )
    return _truncate(ext, p, signed=neg or p.signed)


def apply_operator(p: GridPdf, params: OperatorParams) -> GridPdf:
    """Dispatch on :class:`OperatorParams`: ``(1-lam) p + lam B p``."""
    if params.lam == 0.0:
        return p
    if params.cap is not None:
        base = apply_T_cap(p, params.cap)
    elif params.kernel is not None:
        base = apply_T_kernel(p, params.kernel)
    else:
        return apply_T_lambda(p, params.lam)
    if params.lam == 1.0:
        return base
    lam = params.lam
    return GridPdf(
        p.grid,
        (1.0 - lam) * p.values + lam * base.values,
        leakage=lam * base.leakage,
        mean_leakage=lam * base.mean_leakage,
        signed=p.signed or base.signed,
    )


def tk_exponential_closed_form(a: float, kernel_epsilon: float, x):
    """``T_K`` applied to ``a exp(-a x)`` for the order-2 kernel, via Ei.

    ``(1 - e/3) a e^{-ax} - 2 e x a^2 Ei(-ax) - 2 e x^2 a^2 [e^{-ax}/x + a Ei(-ax)]``
    """
    if not a > 0:
        raise ParameterError(f"a must be positive, got {a}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise DomainError("closed form is singular at x <= 0")
    e = kernel_epsilon
    ex = np.exp(-a * xs)
    eis = np.array([ei(-a * xi) for xi in xs])
    out = (1 - e / 3) * a * ex - 2 * e * xs * a * a * eis - 2 * e * xs * xs * a * a * (ex / xs + a * eis)
    return out if np.ndim(x) else float(out[0])


def kernel_values(k: KernelCoefficients, ratio: Sequence[float]) -> np.ndarray:
    """``K`` as a function of ``t = x/(u+v)`` in [0, 1]."""
    t = np.asarray(ratio, dtype=float)
    return sum((n + 1) * a * t**n for n, a in enumerate(k.coeffs))
