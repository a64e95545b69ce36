"""
Slower relaxation when only a fraction of encounters trade
==========================================================

With effectiveness lambda only that fraction of meetings leads to a trade.
The equilibrium is unchanged, only the speed differs.  Start from x e^{-x}.
"""

import numpy as np

from gasmarket import Gamma1, Grid, OperatorParams, h_theorem_check, iterate, make_pdf

grid = Grid(60.0, 4000)
start = make_pdf(Gamma1(), grid)

for lam in (1.0, 0.5, 0.25):
    trace = iterate(start, OperatorParams(lam=lam), 8)
    report = h_theorem_check(trace)
    d = np.array2string(trace.distances, precision=4)
    print(f"lambda={lam:4.2f}  distances {d}  entropy never fell: {report.passed}")
