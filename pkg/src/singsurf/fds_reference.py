r"""Explicit finite-difference reference solver for the Westervelt signaling problem.

Discretizes

.. math::

    (1 - 2\epsilon\hat\beta P) P_{TT} - e^{-\alpha X} P_{XX} + \alpha e^{-\alpha X} P_X
        = 2\epsilon\hat\beta P_T^2

with second differences in time and space, a centered first difference for
the advection term and a backward difference for ``P_T``:

.. math::

    P_m^{k+1} = 2P_m^k - P_m^{k-1} + \frac{
        r^2 e^{-\alpha X_m} \delta^2 P_m^k
        - \alpha r \Delta T e^{-\alpha X_m} (P_{m+1}^k - P_{m-1}^k) / 2
        + 2\epsilon\hat\beta (P_m^k - P_m^{k-1})^2}{1 - 2\epsilon\hat\beta P_m^k},

where ``r = dT/dX``.  The grid is ``dX = 1/M``, ``dT = T_f/(2M)``, so
``r = T_f/2`` must be below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from singsurf.surface import LweParams

__all__ = ["FdsGrid", "FdsSnapshot", "FdsResult", "DegenerateCoefficient", "fds_solve"]


class DegenerateCoefficient(ArithmeticError):
    """``1 - 2 eps beta_hat P`` came too close to zero."""

    def __init__(self, message, step: int, node: int):
        super().__init__(message)
        self.step = step
        self.node = node


@dataclass(frozen=True)
class FdsGrid:
    """Mesh of the explicit scheme: ``M`` intervals in ``X``, ``2M`` steps to ``T_f``."""

    M: int
    t_f: float

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"M must be at least 2, got {self.M}")
        if not self.t_f > 0:
            raise ValueError(f"T_f must be positive, got {self.t_f}")
        if not self.cfl < 1.0:
            raise ValueError(f"CFL number T_f/2 = {self.cfl:g} must be below 1")

    @property
    def dX(self) -> float:
        return 1.0 / self.M

    @property
    def dT(self) -> float:
        return self.t_f / (2.0 * self.M)

    @property
    def cfl(self) -> float:
        return 0.5 * self.t_f

    @property
    def X(self) -> np.ndarray:
        return np.arange(self.M + 1) * self.dX


@dataclass
class FdsSnapshot:
    T_requested: float
    T: float
    step: int
    X: np.ndarray
    P: np.ndarray

    @property
    def offset(self) -> float:
        """Grid time minus requested time."""
        return self.T - self.T_requested


@dataclass
class FdsResult:
    grid: FdsGrid
    snapshots: list[FdsSnapshot] = field(default_factory=list)

    def at(self, T: float) -> FdsSnapshot:
        return min(self.snapshots, key=lambda s: abs(s.T_requested - T))


def fds_solve(p: LweParams, M: int, t_f: float, snapshot_times,
              min_coefficient: float = 1e-3, boundary=None) -> FdsResult:
    """Run the explicit scheme to the last requested time.

    Snapshot times are mapped to the nearest grid time; the offset is kept
    on each snapshot.  ``boundary`` replaces the datum ``sin(pi T)`` at
    ``X = 0``; it must vanish at ``T = 0``.

    Raises
    ------
    DegenerateCoefficient
        If ``1 - 2 eps beta_hat P`` drops below ``min_coefficient`` at an
        interior node.
    """
    grid = FdsGrid(M, t_f)
    datum = boundary if boundary is not None else (lambda T: math.sin(math.pi * T))
    alpha = p.require_alpha()
    eb2 = 2.0 * p.epsilon * p.beta_hat
    dT, r = grid.dT, grid.cfl
    X = grid.X
    e_int = np.exp(-alpha * X[1:-1])
    diff_c = r * r * e_int
    adv_c = 0.5 * alpha * r * dT * e_int

    wanted = sorted(float(T) for T in snapshot_times)
    for T in wanted:
        if not 0 <= T <= t_f:
            raise ValueError(f"snapshot time {T:g} outside [0, T_f = {t_f:g}]")
    targets = [(T, int(round(T / dT))) for T in wanted]
    last = max((k for _, k in targets), default=0)
    result = FdsResult(grid)

    prev = np.zeros(M + 1)
    cur = np.zeros(M + 1)   # P^1 = P^0
    cur[0] = datum(dT)

    def take(k, P):
        for T, kk in targets:
            if kk == k:
                result.snapshots.append(FdsSnapshot(T, k * dT, k, X, P.copy()))

    take(0, prev)
    if last >= 1:
        take(1, cur)
    for k in range(1, last):
        Pm = cur[1:-1]
        coef = 1.0 - eb2 * Pm
        bad = np.nonzero(coef < min_coefficient)[0]
        if bad.size:
            raise DegenerateCoefficient(
                f"1 - 2 eps beta_hat P = {coef[bad[0]]:.3g} at node {bad[0] + 1}, step {k}",
                k, int(bad[0]) + 1)
        lap = cur[2:] - 2.0 * Pm + cur[:-2]
        adv = cur[2:] - cur[:-2]
        dt_p = Pm - prev[1:-1]
        nxt = np.empty_like(cur)
        nxt[1:-1] = 2.0 * Pm - prev[1:-1] + (diff_c * lap - adv_c * adv + eb2 * dt_p**2) / coef
        nxt[0] = datum((k + 1) * dT)
        nxt[-1] = 0.0
        prev, cur = cur, nxt
        take(k + 1, cur)
    result.snapshots.sort(key=lambda s: s.T_requested)
    return result
