"""
The agent gas reaches the same equilibrium
==========================================

A hundred thousand agents start with one unit each and trade in random
pairs.  The histogram of the final money is compared with the exponential,
and with the cut exponential when a cap of five is imposed.
"""

import time

from gasmarket import (
    AgentEnsemble,
    Exponential,
    Grid,
    SimParams,
    TruncatedExponential,
    histogram,
    l1_distance,
    make_pdf,
    rate_for_mean,
    run,
)

start = AgentEnsemble.uniform(100_000, 1.0)

for lam, cap in [(1.0, None), (0.5, None), (1.0, 5.0)]:
    t0 = time.perf_counter()
    trades = int(10_000_000 / lam)
    final = run(start, SimParams(lam=lam, cap=cap, trades=trades, seed=42), checked=True)
    grid = Grid(cap if cap else 10.0, 101)
    target = Exponential(1.0) if cap is None else TruncatedExponential(rate_for_mean(1.0, cap), cap)
    d = l1_distance(histogram(final, grid), make_pdf(target, grid))
    print(f"lambda={lam}  cap={cap}  trades={trades:.0e}  L1={d:.4f}  "
          f"total={final.total:.6f}  ({time.perf_counter() - t0:.1f}s)")
