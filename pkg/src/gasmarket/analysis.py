"""Iteration drivers, H-theorem check and middle-class statistics."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .distribution import (
    Exponential,
    FamilySpec,
    GridPdf,
    TruncatedExponential,
    check_same_grid,
    entropy,
    l1_distance,
    make_pdf,
    mean,
    norm,
    rate_for_mean,
    truncated_exp_mean,
)
from .errors import InfeasiblePointError, ParameterError
from .operators import OperatorParams, apply_operator

TRACE_HEADER = ["n", "norm", "mean", "entropy", "l1_to_target"]
SCAN_HEADER = ["aL", "CM", "xCM", "per_capita", "proportion"]


@dataclass(frozen=True)
class TraceRecord:
    n: int
    norm: float
    mean: float
    entropy: float
    l1_to_target: float


@dataclass
class IterationTrace:
    target: FamilySpec
    records: List[TraceRecord] = field(default_factory=list)
    final: Optional[GridPdf] = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def entropies(self) -> np.ndarray:
        return self.column("entropy")

    @property
    def distances(self) -> np.ndarray:
        return self.column("l1_to_target")

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for r in self.records:
                w.writerow([r.n] + [repr(float(getattr(r, k))) for k in TRACE_HEADER[1:]])


def equilibrium_family(mean_wealth: float, cap: Optional[float] = None) -> FamilySpec:
    """Fixed point with the given mean: exponential, or capped exponential when ``cap`` is set."""
    if cap is None:
        return Exponential(1.0 / mean_wealth)
    return TruncatedExponential(rate_for_mean(mean_wealth, cap), cap)


def _record(n: int, p: GridPdf, mu: GridPdf) -> TraceRecord:
    return TraceRecord(n, norm(p), mean(p), entropy(p), l1_distance(p, mu))


def iterate(p0: GridPdf, op: OperatorParams, steps: int, normalize: bool = True) -> IterationTrace:
    """Apply ``op`` ``steps`` times, recording every iterate including the start.

    The operators are quadratic, so a norm defect ``d`` in the start grows
    like ``2**n * d`` along the iteration.  With ``normalize`` the start is
    divided by its trapezoid norm once; iterates themselves are never
    rescaled, so leakage stays visible in the recorded norm.
    """
    if steps < 1:
        raise ParameterError(f"steps must be >= 1, got {steps}")
    p = p0.normalized() if normalize else p0
    target = equilibrium_family(mean(p) / norm(p), op.cap)
    mu = make_pdf(target, p.grid)
    trace = IterationTrace(target)
    trace.records.append(_record(0, p, mu))
    for n in range(1, steps + 1):
        p = apply_operator(p, op)
        trace.records.append(_record(n, p, mu))
    trace.final = p
    return trace


@dataclass(frozen=True)
class HTheoremReport:
    violations: List[int]
    h_final: float
    h_target: float
    gap: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        return [
            f"passed={self.passed}",
            f"violations={','.join(map(str, self.violations)) or 'none'}",
            f"h_final={self.h_final!r}",
            f"h_target={self.h_target!r}",
            f"gap={self.gap!r}",
        ]


def h_theorem_check(trace: IterationTrace, slack: float = 1e-6) -> HTheoremReport:
    """Steps ``n`` where ``H_{n+1} < H_n - slack``, plus the distance of the last H to H(target)."""
    if not trace.records:
        raise ParameterError("empty trace")
    if slack < 0:
        raise ParameterError("slack must be >= 0")
    h = trace.entropies
    bad = [int(n) for n in np.flatnonzero(h[1:] < h[:-1] - slack)]
    h_target = trace.target.entropy
    return HTheoremReport(bad, float(h[-1]), h_target, abs(float(h[-1]) - h_target))


# --- middle class ---------------------------------------------------------


@dataclass(frozen=True)
class MiddleClassReport:
    a: float
    cap: float
    m: float
    cm: float
    xcm: float
    per_capita: float
    proportion: float


def _per_capita_displayed(m: float, am: float) -> float:
    e1, e2 = math.exp(-am / 2), math.exp(-2 * am)
    return m / am + m * (e1 - 4 * e2) / (2 * (e1 - e2))


def middle_class_stats(a: float, cap: float, checked: bool = True) -> MiddleClassReport:
    """Share and wealth of agents with money in [m/2, 2m] at the capped fixed point.

    ``checked`` re-integrates the capped exponential over [m/2, 2m] and
    raises if a closed form disagrees by more than 1e-8.
    """
    if not (a > 0 and cap > 0):
        raise ParameterError(f"need a > 0 and cap > 0, got a={a}, cap={cap}")
    m = truncated_exp_mean(a, cap)
    am = a * m
    denom = -math.expm1(-a * cap)
    e1, e2 = math.exp(-am / 2), math.exp(-2 * am)
    cm = (e1 - e2) / denom
    xcm = m * ((2 + am) * e1 - 2 * (1 + 2 * am) * e2) / (2 * am * denom)
    ratio = xcm / cm
    per_capita = _per_capita_displayed(m, am)
    if abs(per_capita - ratio) > 1e-6 * max(1.0, abs(ratio)):
        warnings.warn(f"per-capita closed form {per_capita} disagrees with xCM/CM {ratio}; using the ratio")
        per_capita = ratio
    if checked:
        amp = a / denom
        lo, hi = m / 2, min(2 * m, cap)
        q0 = integrate.quad(lambda x: amp * math.exp(-a * x), lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
        q1 = integrate.quad(lambda x: x * amp * math.exp(-a * x), lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
        if abs(q0 - cm) > 1e-8 or abs(q1 - xcm) > 1e-8:
            raise ArithmeticError(f"middle-class closed form off quadrature: CM {cm} vs {q0}, xCM {xcm} vs {q1}")
    return MiddleClassReport(a, cap, m, cm, xcm, per_capita, xcm / m)


def params_for_scan_point(m_fixed: float, a_cap: float):
    """(a, cap) with product ``a_cap`` whose capped fixed point has mean ``m_fixed``.

    ``a*m = 1 - x/(e^x - 1)`` depends on ``x = a*cap`` alone, so no root
    finding is needed.
    """
    if not (m_fixed > 0 and a_cap > 0 and math.isfinite(a_cap)):
        raise InfeasiblePointError(f"no (a, cap) for m={m_fixed}, aL={a_cap}")
    am = truncated_exp_mean(1.0, a_cap)
    if not am > 0:
        raise InfeasiblePointError(f"aL={a_cap} too small to resolve a*m")
    a = am / m_fixed
    return a, a_cap / a


@dataclass
class ScanResult:
    m_fixed: float
    a_cap: List[float]
    rows: List[Optional[MiddleClassReport]]
    errors: List[Optional[str]]

    def values(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) if r is not None else np.nan for r in self.rows])

    @property
    def decreasing(self) -> dict:
        out = {}
        for name in ("cm", "xcm", "per_capita", "proportion"):
            v = self.values(name)
            v = v[np.isfinite(v)]
            out[name] = bool(np.all(np.diff(v) < 0))
        return out

    @property
    def all_decreasing(self) -> bool:
        return all(self.decreasing.values())

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCAN_HEADER)
            for x, r in zip(self.a_cap, self.rows):
                vals = ["nan"] * 4 if r is None else [repr(v) for v in (r.cm, r.xcm, r.per_capita, r.proportion)]
                w.writerow([repr(float(x))] + vals)


def monotonicity_scan(m_fixed: float, a_cap_values: Sequence[float], strict: bool = True) -> ScanResult:
    """Middle-class statistics along ``x = a*cap`` at fixed mean.

    With ``strict`` an infeasible point raises; otherwise it is recorded as
    a missing row with its error message.
    """
    xs = [float(x) for x in a_cap_values]
    rows: List[Optional[MiddleClassReport]] = []
    errors: List[Optional[str]] = []
    for x in xs:
        try:
            a, cap = params_for_scan_point(m_fixed, x)
        except InfeasiblePointError as exc:
            if strict:
                raise
            rows.append(None)
            errors.append(str(exc))
            continue
        rows.append(middle_class_stats(a, cap))
        errors.append(None)
    return ScanResult(m_fixed, xs, rows, errors)


# --- gas vs operator ------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    l1: float
    mean_gap: float


def gas_vs_operator(hist: GridPdf, pdf: GridPdf) -> Comparison:
    check_same_grid(hist, pdf)
    return Comparison(l1_distance(hist, pdf), mean(hist) - mean(pdf))
