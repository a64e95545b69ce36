"""
Two densities that move apart under one exchange step
=====================================================

The exponential is a fixed point, while the heavy-tailed 1/(1+x)^2 is
pulled towards it.  Their L1 distance still grows after one step, so the
operator is not a contraction on the whole space.
"""

from gasmarket import Exponential, Grid, ParetoLike, apply_T, l1_distance, make_pdf

# the heavy tail needs a long grid
grid = Grid(2000.0, 32001)
y = make_pdf(ParetoLike(), grid)
w = make_pdf(Exponential(1.0), grid)

before = l1_distance(y, w)
after = l1_distance(apply_T(y), apply_T(w))
print(f"||y - w||   = {before:.6f}")
print(f"||Ty - Tw|| = {after:.6f}")
print("distance grew" if after > before else "distance shrank")

# most of the remaining gap to the exact values comes from cutting the tail at 2000
print("tail mass of y beyond the grid:", y.tail_mass)
