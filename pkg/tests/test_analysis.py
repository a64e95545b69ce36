import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from gasmarket import (
    AgentEnsemble,
    Exponential,
    Gamma1,
    Grid,
    OperatorParams,
    Rectangular,
    SimParams,
    TruncatedExponential,
    equilibrium_family,
    gas_vs_operator,
    h_theorem_check,
    histogram,
    iterate,
    make_pdf,
    middle_class_stats,
    monotonicity_scan,
    run,
    solve_kernel_coeffs,
    truncated_exp_mean,
)
from gasmarket.analysis import TRACE_HEADER, IterationTrace, TraceRecord, params_for_scan_point
from gasmarket.errors import GridMismatchError, InfeasiblePointError, ParameterError

# exact rational-arithmetic values of ||T_lambda^n y - mu|| for the Gamma start
GAMMA_DISTANCES = [0.368225823, 0.273011143, 0.206554239, 0.158700788, 0.123423397]


def test_equilibrium_family():
    assert equilibrium_family(2.0) == Exponential(0.5)
    t = equilibrium_family(1.0, 5.0)
    assert isinstance(t, TruncatedExponential) and t.cap == 5.0
    assert t.mean == pytest.approx(1.0, rel=1e-10)


def test_trace_records_every_step(grid60):
    trace = iterate(make_pdf(Gamma1(), grid60), OperatorParams(lam=0.5), 4)
    assert [r.n for r in trace.records] == [0, 1, 2, 3, 4]
    assert isinstance(trace.target, Exponential)
    assert trace.target.rate == pytest.approx(0.5, rel=1e-4)
    assert np.allclose(trace.distances, GAMMA_DISTANCES, atol=2e-3)
    assert np.allclose(trace.column("norm"), 1.0, atol=1e-9)


def test_iterate_rejects_zero_steps(grid60):
    with pytest.raises(ParameterError):
        iterate(make_pdf(Gamma1(), grid60), OperatorParams(), 0)


def test_rectangle_distances_decrease(grid60):
    trace = iterate(make_pdf(Rectangular(2.0, 4.0), grid60), OperatorParams(), 15)
    assert np.all(np.diff(trace.distances) < 0)


def test_rectangle_entropy_limit(grid60):
    trace = iterate(make_pdf(Rectangular(2.0, 4.0), grid60), OperatorParams(), 15)
    report = h_theorem_check(trace, 1e-6)
    assert report.passed
    assert report.h_final == pytest.approx(1 + math.log(3), abs=1e-2)


FINITE_MEAN_FAMILIES = [
    Exponential(1.0),
    Exponential(0.5),
    Gamma1(),
    Rectangular(2.0, 4.0),
    TruncatedExponential(1.0, 5.0),
    TruncatedExponential(0.5, 3.0),
]


@pytest.mark.parametrize("spec", FINITE_MEAN_FAMILIES, ids=str)
@pytest.mark.parametrize("lam", [1.0, 0.9, 0.5, 0.25])
def test_entropy_never_falls(grid60, spec, lam):
    trace = iterate(make_pdf(spec, grid60), OperatorParams(lam=lam), 15)
    assert h_theorem_check(trace, 1e-6).passed


@pytest.mark.parametrize("spec", [Rectangular(2.0, 4.0), Gamma1(), TruncatedExponential(2.0, 10.0)], ids=str)
def test_entropy_never_falls_with_cap(spec):
    g = Grid(10.0, 2001)
    p = make_pdf(spec, g)
    if isinstance(spec, Gamma1):
        p = type(p)(g, p.values * (g.x < 10.0))
    trace = iterate(p, OperatorParams(cap=10.0), 15)
    assert h_theorem_check(trace, 1e-6).passed
    assert isinstance(trace.target, TruncatedExponential)
    assert trace.distances[-1] < trace.distances[0]


def test_kernel_iteration_leaves_exponential(grid60):
    trace = iterate(make_pdf(Exponential(1.0), grid60), OperatorParams(kernel=solve_kernel_coeffs(2, 0.5)), 3)
    assert trace.distances[1] >= 0.01


def test_h_theorem_flags_a_drop():
    recs = [TraceRecord(n, 1.0, 1.0, h, 0.0) for n, h in enumerate([0.5, 0.7, 0.69, 0.8, 0.8 - 1e-7])]
    report = h_theorem_check(IterationTrace(Exponential(1.0), recs), 1e-6)
    assert report.violations == [1]
    assert not report.passed
    assert report.gap == pytest.approx(abs(0.8 - 1e-7 - 1.0))
    assert "passed=False" in report.lines()


def test_h_theorem_argument_checks():
    with pytest.raises(ParameterError):
        h_theorem_check(IterationTrace(Exponential(1.0), []))
    recs = [TraceRecord(0, 1.0, 1.0, 0.5, 0.0)]
    with pytest.raises(ParameterError):
        h_theorem_check(IterationTrace(Exponential(1.0), recs), -1.0)


def test_trace_csv(tmp_path, grid60):
    trace = iterate(make_pdf(Gamma1(), grid60), OperatorParams(lam=0.5), 2)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 3], trace.entropies)


# --- middle class ---------------------------------------------------------


def test_middle_class_reference_point():
    r = middle_class_stats(1.0, 2.0)
    assert r.m == pytest.approx(0.68696471450, abs=1e-10)
    assert 2 * r.m < r.cap


def test_middle_class_uncapped_limit():
    r = middle_class_stats(1.0, 200.0)
    assert r.cm == pytest.approx(math.exp(-0.5) - math.exp(-2.0), abs=1e-6)


LATTICE = [(a, cap) for a in (0.1, 0.5, 1.0, 2.0, 5.0) for cap in (0.5, 1.0, 2.0, 10.0, 100.0)]


@pytest.mark.parametrize("a,cap", LATTICE)
def test_middle_class_against_quadrature(a, cap):
    r = middle_class_stats(a, cap, checked=False)
    amp = a / -math.expm1(-a * cap)
    lo, hi = r.m / 2, min(2 * r.m, cap)
    cm = integrate.quad(lambda x: amp * math.exp(-a * x), lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
    xcm = integrate.quad(lambda x: x * amp * math.exp(-a * x), lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
    assert abs(r.cm - cm) <= 1e-8 and abs(r.xcm - xcm) <= 1e-8
    assert r.proportion == pytest.approx(xcm / r.m, rel=1e-8)
    assert r.per_capita == pytest.approx(xcm / cm, rel=1e-6)
    assert 2 * r.m < cap


@given(st.floats(1e-3, 50.0), st.floats(1e-3, 500.0))
@settings(max_examples=200, deadline=None)
def test_mean_below_half_cap(a, cap):
    assert 2 * truncated_exp_mean(a, cap) < cap


def test_middle_class_rejects():
    with pytest.raises(ParameterError):
        middle_class_stats(0.0, 1.0)
    with pytest.raises(ParameterError):
        middle_class_stats(1.0, -1.0)


def test_scan_point_inversion():
    for x in (0.5, 2.5, 16.0, 900.0):
        a, cap = params_for_scan_point(1.0, x)
        assert a * cap == pytest.approx(x, rel=1e-12)
        assert truncated_exp_mean(a, cap) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(InfeasiblePointError):
        params_for_scan_point(1.0, 0.0)


def test_monotonicity_scan():
    scan = monotonicity_scan(1.0, [2.5, 4, 8, 16, 32])
    assert scan.all_decreasing
    assert all(r.m == pytest.approx(1.0, rel=1e-10) for r in scan.rows)


def test_scan_infeasible_rows(tmp_path):
    scan = monotonicity_scan(1.0, [2.5, -1.0, 8.0], strict=False)
    assert scan.rows[1] is None and scan.errors[1]
    assert scan.all_decreasing
    path = tmp_path / "scan.csv"
    scan.to_csv(path)
    assert path.read_text().splitlines()[2] == "-1.0,nan,nan,nan,nan"
    with pytest.raises(InfeasiblePointError):
        monotonicity_scan(1.0, [2.5, -1.0])


def test_per_capita_displayed_form_consistent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for a, cap in LATTICE:
            middle_class_stats(a, cap)


# --- gas vs operator ------------------------------------------------------


def test_gas_vs_operator():
    g = Grid(10.0, 101)
    out = run(AgentEnsemble.uniform(100_000), SimParams(trades=10_000_000, seed=42))
    cmp = gas_vs_operator(histogram(out, g), make_pdf(Exponential(1.0), g))
    assert cmp.l1 <= 0.05
    assert abs(cmp.mean_gap) < 0.01
    with pytest.raises(GridMismatchError):
        gas_vs_operator(histogram(out, g), make_pdf(Exponential(1.0), Grid(10.0, 201)))
