r"""KSS solution of the damped isothermal signaling problem on a bounded column.

The physical field ``w`` solves

.. math::

    w_{tt} - a_2 w_{zz} + a_1 w_z + \hat\mu w_t = 0,\qquad
    w(0, t) = \cos\omega t,\quad w(\ell, t) = 0,

with ``a2 = c0^2`` and ``a1 = gamma g``.  Writing ``w = psi (u + F)`` with
``psi = exp(a1 z / 2 a2)`` removes the advection term, and the quartic lift
``F`` (see :mod:`singsurf.lift`) moves the boundary datum into a source:

.. math::

    u_{tt} = -(-a_2 \partial_{zz} + a_0) u - \hat\mu u_t - G,\qquad
    G = F_{tt} - a_2 F_{zz} + a_0 F + \hat\mu F_t,

where ``a0 = a1^2 / 4 a2``.  Each step freezes ``b = -mu_hat u_t - G`` at
the start of the step and applies the exact cosine/sine propagator of the
undamped operator.  Sigma factors with decreasing powers are applied to
the sine spectra of ``u`` and ``u_t`` after every step.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from singsurf.kss import (BACKENDS, CostCounter, Grid1D, HarmonicForcing, NodePair,
                          Operator1D, WavePropagator, WaveState)
from singsurf.lift import LiftSample, QuarticShapes, quartic_shapes
from singsurf.specfun import sigma_factors
from singsurf.surface import IsothermalShockParams

__all__ = [
    "NumericalBlowUp",
    "RegularizationSchedule",
    "ShockTransform",
    "ShockConfig",
    "ShockSnapshot",
    "ShockResult",
    "transform_problem",
    "build_lift",
    "solve_shock",
    "measure_shock_front",
    "measure_jump",
]


LIFT_SOURCES = ("frozen", "exact")


class NumericalBlowUp(ArithmeticError):
    """Non-finite values appeared in the solution."""

    def __init__(self, message, step: int, time: float):
        super().__init__(message)
        self.step = step
        self.time = time


@dataclass(frozen=True)
class RegularizationSchedule:
    """Sigma-factor powers for the two solution components as functions of time."""

    power_u: Callable[[float], float]
    power_ut: Callable[[float], float]
    t_end: float
    label: str = "custom"

    @classmethod
    def decreasing(cls, t_end: float, scale_u: float = 1.0, scale_ut: float = 3.0):
        """``scale * (1 - t/t_end)^2`` for each component, zero past ``t_end``."""
        if not t_end > 0:
            raise ValueError(f"t_end must be positive, got {t_end}")

        def ramp(scale):
            return lambda t: scale * max(0.0, 1.0 - t / t_end) ** 2
        return cls(ramp(scale_u), ramp(scale_ut), t_end,
                   f"decreasing({scale_u:g},{scale_ut:g})")

    @classmethod
    def constant(cls, power: float, t_end: float = math.inf):
        return cls(lambda t: power, lambda t: power, t_end, f"constant({power:g})")

    @classmethod
    def none(cls):
        return cls.constant(0.0)


@dataclass(frozen=True)
class ShockTransform:
    """Reduced constant-coefficient problem: ``a2``, ``a0`` and the growth factor rate."""

    a2: float
    a1: float
    a0: float
    ell: float

    @property
    def psi_rate(self) -> float:
        """``a1 / (2 a2)``, equal to ``1 / 2H``."""
        return self.a1 / (2.0 * self.a2)

    def psi(self, z) -> np.ndarray:
        return np.exp(self.psi_rate * np.asarray(z, dtype=float))

    def operator(self, grid: Grid1D) -> Operator1D:
        return Operator1D.constant(self.a2, self.a0, grid)


def transform_problem(p: IsothermalShockParams, ell: float) -> ShockTransform:
    """Remove the advection term by the substitution ``w = psi(z) w~``."""
    if not ell > 0:
        raise ValueError(f"domain length must be positive, got {ell}")
    a2 = p.c0**2
    a1 = p.gamma * p.g
    return ShockTransform(a2=a2, a1=a1, a0=a1 * a1 / (4.0 * a2), ell=float(ell))


class ShockLift:
    """Quartic lift of ``cos(omega t)`` whose induced source vanishes at both ends."""

    def __init__(self, p: IsothermalShockParams, tr: ShockTransform, cutoff: float):
        if not 0 < cutoff < tr.ell:
            raise ValueError(f"lift cutoff {cutoff:g} must lie in (0, {tr.ell:g})")
        self.p = p
        self.tr = tr
        self.shapes: QuarticShapes = quartic_shapes(cutoff)

    def boundary(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Time derivatives ``(d^k f0, d^k f2)`` for ``k = 0..2``."""
        om, mu = self.p.omega, self.p.mu_hat
        a0, a2 = self.tr.a0, self.tr.a2
        c, s = math.cos(om * t), math.sin(om * t)
        # d^k cos(om t) for k = 0..4
        f0 = np.array([c, -om * s, -om**2 * c, om**3 * s, om**4 * c])
        # f2 = (f0'' + a0 f0 + mu f0') / (2 a2)
        f2 = (f0[2:5] + a0 * f0[0:3] + mu * f0[1:4]) / (2.0 * a2)
        return f0[:3], f2

    def coefficients(self, t: float) -> np.ndarray:
        f0, f2 = self.boundary(t)
        return self.shapes.coefficients(f0[0], f2[0])

    def sample(self, z, t: float) -> LiftSample:
        sh = self.shapes
        a, b = sh.shape_a(z), sh.shape_b(z)
        a_zz, b_zz = sh.shape_a(z, 2), sh.shape_b(z, 2)
        f0, f2 = self.boundary(t)
        F = f0[0] * a + f2[0] * b
        F_t = f0[1] * a + f2[1] * b
        F_tt = f0[2] * a + f2[2] * b
        F_zz = f0[0] * a_zz + f2[0] * b_zz
        G = F_tt - self.tr.a2 * F_zz + self.tr.a0 * F + self.p.mu_hat * F_t
        return LiftSample(F, F_t, F_tt, F_zz, G)


def build_lift(p: IsothermalShockParams, grid: Grid1D, t: float,
               cutoff: float | None = None) -> LiftSample:
    """Lift ``F`` and the induced source ``G`` on the interior points of ``grid``.

    ``cutoff`` defaults to ``80 dz``.
    """
    tr = transform_problem(p, grid.length)
    cutoff = 80.0 * grid.dx if cutoff is None else cutoff
    return ShockLift(p, tr, cutoff).sample(grid.points, t)


# {{{ driver

@dataclass
class ShockConfig:
    """Parameters of one shock run.

    ``dt`` overrides ``cfl`` when given.  ``lift_cells`` sets the lift
    cutoff in grid cells; ``length_c0`` the column height in units of ``c0``
    (seconds of travel).
    """

    params: IsothermalShockParams = field(default_factory=IsothermalShockParams)
    n: int = 8192
    cfl: float = 16.0
    dt: float | None = None
    t_end: float = 11.0
    length_c0: float = 40.0
    lift_cells: float = 80.0
    backend: str = "kss"
    schedule: RegularizationSchedule | None = None
    snapshots: tuple[float, ...] = (0.5, 5.0, 10.0)
    tol: float = 1e-4
    k_max: int = 40
    lift_source: str = "frozen"

    def __post_init__(self):
        if self.lift_source not in LIFT_SOURCES:
            raise ValueError(f"unknown lift_source {self.lift_source!r}; "
                             f"expected one of {LIFT_SOURCES}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if not self.cfl > 0:
            raise ValueError(f"cfl must be positive, got {self.cfl}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if not self.length_c0 > 0:
            raise ValueError(f"length_c0 must be positive, got {self.length_c0}")
        for t in self.snapshots:
            if not 0 <= t <= self.t_end:
                raise ValueError(f"snapshot time {t:g} outside [0, t_end = {self.t_end:g}]")
        if self.schedule is None:
            self.schedule = (RegularizationSchedule.decreasing(self.t_end)
                             if self.t_end > 0 else RegularizationSchedule.none())

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.n, self.length_c0 * self.params.c0)

    @property
    def time_step(self) -> float:
        if self.dt is not None:
            return self.dt
        return self.cfl * self.grid.dx / self.params.c0


@dataclass
class ShockSnapshot:
    t: float
    z: np.ndarray
    w: np.ndarray


@dataclass
class ShockResult:
    config: ShockConfig
    snapshots: list[ShockSnapshot]
    counter: CostCounter
    steps: int
    elapsed: float

    def at(self, t: float) -> ShockSnapshot:
        best = min(self.snapshots, key=lambda s: abs(s.t - t))
        if abs(best.t - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t = {t:g}")
        return best


class _ShockStepper:
    def __init__(self, cfg: ShockConfig, counter: CostCounter):
        self.cfg = cfg
        self.p = cfg.params
        self.grid = cfg.grid
        self.tr = transform_problem(self.p, self.grid.length)
        self.op = self.tr.operator(self.grid)
        self.nodes = NodePair.from_operator(self.op)
        self.lift = ShockLift(self.p, self.tr, cfg.lift_cells * self.grid.dx)
        self.counter = counter
        self.z = self.grid.points
        self.psi = self.tr.psi(self.z)
        self._props: dict[float, tuple[WavePropagator, HarmonicForcing | None]] = {}
        if cfg.lift_source == "exact":
            # G = g_c cos(omega t) + g_s sin(omega t)
            quarter = 0.5 * math.pi / self.p.omega
            self._g = (self.lift.sample(self.z, 0.0).G, self.lift.sample(self.z, quarter).G)

    def propagator(self, dt: float) -> tuple[WavePropagator, HarmonicForcing | None]:
        key = round(dt, 15)
        if key not in self._props:
            prop = WavePropagator(self.op, dt, self.cfg.backend, self.nodes,
                                  tol=self.cfg.tol, k_max=self.cfg.k_max, counter=self.counter)
            forcing = None
            if self.cfg.lift_source == "exact":
                # the source carries -G
                forcing = HarmonicForcing(prop, -self._g[0], -self._g[1], self.p.omega)
            self._props[key] = (prop, forcing)
        return self._props[key]

    def initial(self) -> WaveState:
        s = self.lift.sample(self.z, 0.0)
        return WaveState(-s.F, -s.F_t, 0.0)

    def step(self, state: WaveState, dt: float) -> WaveState:
        t = state.t
        source = -self.p.mu_hat * state.ut
        if self.cfg.lift_source == "frozen":
            source = source - self.lift.sample(self.z, t).G
        sched = self.cfg.schedule
        n = self.grid.n
        pu, put = sched.power_u(t), sched.power_ut(t)
        filters = (sigma_factors(n, pu) if pu > 0 else None,
                   sigma_factors(n, put) if put > 0 else None)
        prop, forcing = self.propagator(dt)
        nxt = prop.step(state, source, filters, forcing)
        nxt.t = t + dt
        return nxt

    def physical(self, state: WaveState, t: float) -> np.ndarray:
        if t <= 0.0:
            # the signal is switched on for t > 0 only
            return np.zeros_like(state.u)
        s = self.lift.sample(self.z, t)
        return self.p.W0 * self.psi * (state.u + s.F)


def solve_shock(cfg: ShockConfig) -> ShockResult:
    """Integrate to ``cfg.t_end`` and record ``w`` at the snapshot times.

    Snapshot times that fall between steps are reached by one shortened
    step from the preceding grid time; the main sequence is unaffected.

    Raises
    ------
    NumericalBlowUp
        If the state stops being finite; carries the step index.
    KrylovConvergenceError
        From the Krylov backends.
    """
    start = time.perf_counter()
    counter = CostCounter()
    # physics is linear in W0: run with a unit signal, rescale on output
    st = _ShockStepper(cfg, counter)
    dt = cfg.time_step
    n_steps = int(math.floor(cfg.t_end / dt + 1e-9))
    pending = sorted(set(float(t) for t in cfg.snapshots))
    snaps: list[ShockSnapshot] = []
    full_z = st.grid.full_points

    def record(state: WaveState, t: float):
        w = st.physical(state, t)
        wb = cfg.params.W0 * math.cos(cfg.params.omega * t) if t > 0 else 0.0
        snaps.append(ShockSnapshot(t, full_z, np.concatenate([[wb], w, [0.0]])))

    def flush(state: WaveState, upto: float):
        # record every pending time in [state.t, upto)
        while pending and pending[0] < upto:
            tp = pending.pop(0)
            rem = tp - state.t
            record(state if rem <= 1e-12 * max(1.0, tp) else st.step(state, rem), tp)

    state = st.initial()
    for k in range(n_steps):
        flush(state, (k + 1) * dt - 1e-12 * max(1.0, (k + 1) * dt))
        state = st.step(state, dt)
        state.t = (k + 1) * dt
        if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.ut))):
            raise NumericalBlowUp(f"non-finite solution at step {k + 1} (t = {state.t:g})",
                                  k + 1, state.t)
    flush(state, math.inf)
    snaps.sort(key=lambda s: s.t)
    return ShockResult(cfg, snaps, counter, n_steps, time.perf_counter() - start)

# }}}


# {{{ measurement

def _leading_edge(w, floor: float) -> int:
    """Index of the right-most sample with ``|w| > floor * max|w|``."""
    mag = np.abs(w)
    above = np.nonzero(mag > floor * mag.max())[0]
    return int(above[-1]) if above.size else 0


def measure_shock_front(z, w, dz: float, behind_cells: int = 40) -> float:
    """Front position as the right-most half-jump crossing.

    The leading edge is the right-most sample above ``1e-2 max|w|``.  The jump
    scale ``J`` is the largest ``|w|`` within ``behind_cells`` cells behind
    it, and the front is where ``|w|`` last crosses ``J/2`` (linear
    interpolation between samples).
    """
    z = np.asarray(z, dtype=float)
    mag = np.abs(np.asarray(w, dtype=float))
    if mag.max() == 0:
        return float(z[0])
    edge = _leading_edge(mag, 1e-2)
    lo = max(0, edge - int(round(behind_cells * (dz / (z[1] - z[0])))))
    level = 0.5 * mag[lo:edge + 1].max()
    idx = lo + int(np.nonzero(mag[lo:edge + 1] >= level)[0][-1])
    if idx + 1 >= z.size:
        return float(z[idx])
    m0, m1 = mag[idx], mag[idx + 1]
    frac = (m0 - level) / (m0 - m1) if m0 != m1 else 0.0
    return float(z[idx] + frac * (z[idx + 1] - z[idx]))


def measure_jump(z, w, front: float, dz: float, half_window: float = 5.0) -> float:
    """Jump across ``front``: extreme value behind minus the value ahead.

    Samples in ``[front - half_window dz, front + half_window dz]`` are used;
    the value ahead is the right-most sample of the window and the extreme
    is the maximum or minimum, whichever lies farther from it.
    """
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    mask = (z >= front - half_window * dz) & (z <= front + half_window * dz)
    if not np.any(mask):
        raise ValueError("jump window contains no samples")
    window = w[mask]
    ahead = window[-1]
    hi, lo = window.max() - ahead, window.min() - ahead
    return float(hi if hi >= -lo else lo)

# }}}
