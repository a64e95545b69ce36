"""Discrete gas of agents exchanging money by random pairs.

One step draws an ordered pair ``i != j`` uniformly.  With probability
``lam`` the pair attempts a trade (otherwise the encounter is frustrated and
both keep their money).  If a cap is set and ``m_i + m_j > cap`` the trade
is refused.  Otherwise the pair total is re-split by a uniform fraction.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numba
import numpy as np

from .distribution import Grid, GridPdf
from .errors import EnsembleError, ParameterError

_CHUNK = 1 << 20
_TWO_53 = 1 << 53


@dataclass(frozen=True, eq=False)
class AgentEnsemble:
    money: np.ndarray

    def __post_init__(self):
        m = np.array(self.money, dtype=float)
        if m.ndim != 1:
            raise EnsembleError("money must be a 1-d array")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise EnsembleError("money values must be finite and >= 0")
        m.setflags(write=False)
        object.__setattr__(self, "money", m)

    @classmethod
    def uniform(cls, n_agents: int, money: float = 1.0) -> "AgentEnsemble":
        return cls(np.full(int(n_agents), float(money)))

    @property
    def size(self) -> int:
        return self.money.size

    @property
    def total(self) -> float:
        return math.fsum(self.money)

    @property
    def mean(self) -> float:
        return self.total / self.size


@dataclass(frozen=True)
class SimParams:
    lam: float = 1.0
    cap: Optional[float] = None
    trades: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.cap is not None and not self.cap > 0:
            raise ParameterError(f"cap must be positive, got {self.cap}")
        if int(self.trades) != self.trades or self.trades < 0:
            raise ParameterError(f"trades must be a nonnegative integer, got {self.trades}")


def trade(m_i: float, m_j: float, split_fraction: float) -> Tuple[float, float]:
    """Re-split the pair total; the second share is the remainder so the sum is kept."""
    if not 0.0 < split_fraction < 1.0:
        raise ParameterError(f"split fraction must lie in (0, 1), got {split_fraction}")
    if m_i < 0 or m_j < 0:
        raise ParameterError("money must be nonnegative")
    total = m_i + m_j
    first = split_fraction * total
    return first, total - first


@numba.njit(cache=True)
def _apply_trades(money, first, second, gate, split, lam, cap):
    done = 0
    for t in range(first.size):
        if gate[t] >= lam:
            continue
        i = first[t]
        j = second[t]
        total = money[i] + money[j]
        if total > cap:
            continue
        share = split[t] * total
        money[i] = share
        money[j] = total - share
        done += 1
    return done


def _draw(rng: np.random.Generator, n_agents: int, count: int):
    first = rng.integers(0, n_agents, size=count)
    second = rng.integers(0, n_agents - 1, size=count)
    second += second >= first
    gate = rng.random(count)
    # strictly inside (0, 1)
    split = (rng.integers(0, _TWO_53, size=count) + 0.5) / _TWO_53
    return first, second, gate, split


def _advance(money: np.ndarray, params: SimParams, rng: np.random.Generator, count: int) -> int:
    cap = math.inf if params.cap is None else float(params.cap)
    done = 0
    left = count
    while left > 0:
        k = min(left, _CHUNK)
        first, second, gate, split = _draw(rng, money.size, k)
        done += _apply_trades(money, first, second, gate, split, float(params.lam), cap)
        left -= k
    return done


def step(e: AgentEnsemble, params: SimParams, rng: np.random.Generator) -> AgentEnsemble:
    """One candidate trade; returns a new ensemble."""
    if e.size < 2:
        raise EnsembleError("need at least two agents to trade")
    money = e.money.copy()
    _advance(money, params, rng, 1)
    return AgentEnsemble(money)


def run(e: AgentEnsemble, params: SimParams, checked: bool = False) -> AgentEnsemble:
    """Apply ``params.trades`` steps from a generator seeded with ``params.seed``.

    With ``checked`` the cap and conservation are asserted after the run.
    """
    if e.size < 2:
        raise EnsembleError("need at least two agents to trade")
    if params.trades == 0:
        return e
    money = e.money.copy()
    _advance(money, params, np.random.default_rng(params.seed), params.trades)
    out = AgentEnsemble(money)
    if checked:
        start = e.total
        drift = abs(out.total - start) / start if start else abs(out.total)
        if drift > 1e-9:
            raise AssertionError(f"total money drifted by {drift:.3e} (relative)")
        if params.cap is not None and np.any((money > params.cap) & (money != e.money)):
            raise AssertionError("an agent that traded ended above the cap")
    return out


def histogram(e: AgentEnsemble, grid: Grid) -> GridPdf:
    """Density estimate on the dual cells of ``grid``.

    Node ``i`` collects money in ``[x_i - h/2, x_i + h/2)`` (half cells at
    both ends), so the trapezoid norm of the result is exactly one.  Agents
    beyond ``x_max`` are left out and their fraction is returned as
    ``tail_mass``.
    """
    h = grid.h
    idx = np.floor((e.money + 0.5 * h) / h).astype(np.int64)
    inside = e.money <= grid.x_max
    idx = np.minimum(idx[inside], grid.n - 1)
    counts = np.bincount(idx, minlength=grid.n).astype(float)
    kept = counts.sum()
    if kept == 0:
        raise EnsembleError("every agent lies beyond the histogram grid")
    values = counts / (kept * grid.weights)
    return GridPdf(grid, values, tail_mass=(e.size - kept) / e.size)


def write_snapshot_csv(e: AgentEnsemble, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["agent", "money"])
        for i, m in enumerate(e.money):
            w.writerow([i, repr(float(m))])


def read_snapshot_csv(path: Union[str, Path]) -> AgentEnsemble:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["agent", "money"]:
        raise ParameterError(f"{path}: expected header 'agent,money'")
    return AgentEnsemble(np.array([float(r[1]) for r in rows[1:]]))


def write_metadata(params: SimParams, path: Union[str, Path], **extra) -> None:
    items = {"seed": params.seed, "lambda": params.lam, "cap": params.cap, "trades": params.trades}
    items.update(extra)
    with open(path, "w") as fh:
        for key, value in items.items():
            fh.write(f"{key}={'none' if value is None else value}\n")
