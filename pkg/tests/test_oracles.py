"""Independent oracles: adaptive quadrature and exact symbolic iteration."""
import math

import numpy as np
import pytest
import sympy as sp
from scipy import integrate, optimize

from gasmarket import Exponential, Gamma1, Grid, OperatorParams, ParetoLike, apply_T, iterate, l1_distance, make_pdf


def l1_by_quad(f, breaks):
    return sum(
        integrate.quad(lambda x: abs(f(x)), a, b, limit=500, epsabs=1e-13)[0] for a, b in zip(breaks[:-1], breaks[1:])
    )


def pareto_pair_oracle():
    y = lambda x: 1 / (1 + x) ** 2
    w = lambda x: math.exp(-x)
    # pair-sum density of 1/(1+x)^2 in closed form; Tw = w
    c = lambda s: (2 * s / (1 + s) + 4 * math.log1p(s) / (2 + s)) / (2 + s) ** 2
    g = lambda s: c(s) / s if s > 0 else 1.0

    def ty(x):
        # s = 1/t maps the tail beyond x + 50 to a finite interval
        near = integrate.quad(g, x, x + 50, limit=500, epsabs=1e-13)[0]
        far = integrate.quad(lambda t: g(1 / t) / t**2, 0, 1 / (x + 50), limit=500, epsabs=1e-15)[0]
        return near + far

    r1 = optimize.brentq(lambda x: y(x) - w(x), 0.5, 5)
    r2 = optimize.brentq(lambda x: ty(x) - w(x), 0.3, 5)
    before = l1_by_quad(lambda x: y(x) - w(x), [0, r1, 50, math.inf])
    after = l1_by_quad(lambda x: ty(x) - w(x), [0, r2, 10, 50, 200, 1000, math.inf])
    return before, after


def test_pareto_pair_against_quadrature():
    before, after = pareto_pair_oracle()
    assert before == pytest.approx(0.4072643776, abs=1e-8)
    # a 20-digit mpmath evaluation gives 0.50566908567
    assert after == pytest.approx(0.5056690857, abs=1e-8)
    g = Grid(2000.0, 32001)
    y, w = make_pdf(ParetoLike(), g), make_pdf(Exponential(1.0), g)
    # the grid stops at 2000, where the tail 1/(1+x) still carries 5e-4
    assert l1_distance(y, w) == pytest.approx(before, abs=2e-3)
    assert l1_distance(apply_T(y), apply_T(w)) == pytest.approx(after, abs=2e-3)


def symbolic_gamma_distances(steps):
    # exact T_lambda(1/2) iterates of x e^{-x}: every iterate is a polynomial times e^{-x}
    x, s, u = sp.symbols("x s u", positive=True)

    def apply(poly):
        c = sp.expand(sp.integrate(poly.subs(x, u) * poly.subs(x, s - u), (u, 0, s)))
        tail = sp.integrate(sp.expand(c / s) * sp.exp(-s), (s, x, sp.oo))
        return sp.expand(sp.simplify(tail * sp.exp(x)))

    y, out = x, []
    for _ in range(steps + 1):
        f = sp.lambdify(x, y * sp.exp(-x), "math")
        d = lambda t: f(t) - 0.5 * math.exp(-t / 2)
        grid = np.linspace(1e-9, 80, 4001)
        v = np.array([d(t) for t in grid])
        idx = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
        roots = [optimize.brentq(d, grid[i], grid[i + 1]) for i in idx]
        out.append(l1_by_quad(d, [0.0] + roots + [80.0, math.inf]))
        y = sp.expand(sp.Rational(1, 2) * y + sp.Rational(1, 2) * apply(y))
    return out


# full exact sequence, computed once by symbolic_gamma_distances(4)
GAMMA_EXACT = [0.36822582306, 0.27301114294, 0.20655423948, 0.15870078814, 0.12342339733]


def test_gamma_sequence_against_symbolic_iteration():
    exact = symbolic_gamma_distances(1)
    assert exact == pytest.approx(GAMMA_EXACT[:2], abs=1e-9)
    trace = iterate(make_pdf(Gamma1(), Grid(60.0, 4000)), OperatorParams(lam=0.5), 4)
    assert np.max(np.abs(trace.distances - GAMMA_EXACT)) <= 1e-4
