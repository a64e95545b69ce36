"""
Relaxation of a rectangular wealth density under the exchange operator
=======================================================================

Start everyone with money between 2 and 4, apply the random-exchange
operator a few times and watch the density approach the exponential with
the same mean.  The printed table is the L1 distance, the entropy and the
norm at every step.
"""

import math

import numpy as np

from gasmarket import Grid, OperatorParams, Rectangular, iterate, make_pdf

grid = Grid(60.0, 4000)
start = make_pdf(Rectangular(2.0, 4.0), grid)
trace = iterate(start, OperatorParams(), 10)

print("target:", trace.target)
print(" n   L1 to target   entropy    norm")
for r in trace.records:
    print(f"{r.n:2d}   {r.l1_to_target:11.6f}   {r.entropy:8.5f}   {r.norm:.9f}")

# the limit entropy for mean 3 is 1 + ln 3
print("1 + ln 3 =", 1 + math.log(3))

# a few values of the last iterate next to the exponential
x = grid.x
for xi in (0.0, 1.0, 3.0, 6.0, 12.0):
    i = int(np.argmin(np.abs(x - xi)))
    print(f"x={x[i]:5.2f}  T^10 p={trace.final.values[i]:.6f}  exp={np.exp(-x[i] / 3) / 3:.6f}")
