"""
Markets with a richness cap
===========================

Pairs whose joint money exceeds the cap do not trade.  The equilibrium is
an exponential cut at the cap; its rate follows from the mean.  The second
half looks at the middle class, the agents holding between half and twice
the mean, as the cap is relaxed at fixed mean.
"""

from gasmarket import (
    Grid,
    OperatorParams,
    Rectangular,
    iterate,
    make_pdf,
    middle_class_stats,
    monotonicity_scan,
)

cap = 10.0
grid = Grid(cap, 2001)
trace = iterate(make_pdf(Rectangular(2.0, 4.0), grid), OperatorParams(cap=cap), 15)
print("capped equilibrium:", trace.target)
print("L1 to it after 15 steps:", trace.distances[-1])
print("norm and mean after 15 steps:", trace.records[-1].norm, trace.records[-1].mean)

r = middle_class_stats(1.0, 2.0)
print(f"\na=1, cap=2: mean {r.m:.6f}, middle-class share {r.cm:.6f}, its wealth share {r.proportion:.6f}")

scan = monotonicity_scan(1.0, [2.5, 4, 8, 16, 32])
print("\n aL      share     wealth    per capita")
for x, row in zip(scan.a_cap, scan.rows):
    print(f"{x:4.1f}   {row.cm:.6f}  {row.xcm:.6f}  {row.per_capita:.6f}")
print("all decreasing:", scan.all_decreasing)
