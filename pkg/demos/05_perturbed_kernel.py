"""
A perturbed exchange kernel moves the equilibrium
=================================================

The order-2 kernel keeps agents and money conserved for every epsilon,
but the exponential is no longer a fixed point.  The quadrature result is
checked against the closed form in terms of the exponential integral.
"""

import numpy as np

from gasmarket import (
    Exponential,
    Grid,
    apply_T_kernel,
    l1_distance,
    make_pdf,
    mean,
    norm,
    solve_kernel_coeffs,
    tk_exponential_closed_form,
)

grid = Grid(60.0, 4000)
p = make_pdf(Exponential(1.0), grid).normalized()

for eps in (0.0, 0.25, 0.5, 1.0):
    k = solve_kernel_coeffs(2, eps)
    q = apply_T_kernel(p, k)
    print(f"eps={eps:4.2f}  a={np.round(k.coeffs, 4)}  ||TK p - p||={l1_distance(q, p):.5f}"
          f"  norm={norm(q) + q.leakage:.9f}  mean={mean(q) + q.mean_leakage:.7f}")

q = apply_T_kernel(p, solve_kernel_coeffs(2, 0.5))
x = grid.x
sel = (x >= grid.h) & (x <= 20)
gap = np.max(np.abs(q.values[sel] - tk_exponential_closed_form(1.0, 0.5, x[sel])))
print("largest gap to the closed form on [h, 20]:", gap)
