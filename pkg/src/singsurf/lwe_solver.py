r"""KSS solution of the dimensionless inhomogeneous Westervelt signaling problem.

The pressure ``P(X, T)`` on ``0 < X < 1`` solves

.. math::

    P_{TT} - e^{-\alpha X} (P_{XX} - \alpha P_X)
        - \epsilon\hat\beta\,\partial_{TT}(P^2) = 0,\qquad
    P(0, T) = \sin \pi T,\quad P(1, T) = 0,

from rest.  With ``K = -alpha/2`` the map

.. math::

    Y = \phi(X) = \frac{1 - e^{-K X}}{1 - e^{-K}},\qquad
    C = \frac{K}{1 - e^{-K}}

makes the wave speed constant (``C``), and ``P = psi(Y) Pbar`` with
``psi = exp(alpha X / 4)`` removes the first-order term.  The reduced
operator is ``Lbar = -C^2 d^2/dY^2 + a0bar(Y)`` with

.. math::

    \bar a_0 = \frac{\tilde a_1^2}{4 C^2} - \frac{\tilde a_1'(Y)}{2}
             = \frac{3\alpha^2}{16} e^{2 K X},\qquad
    \tilde a_1 = \frac{\alpha}{2} C e^{K X},

and the reduced equation reads
``Pbar_TT + Lbar Pbar - 2 eps beta_hat psi d_T(Pbar Pbar_T) = 0``.  The
boundary datum is carried by a quartic lift ``F`` on ``[0, 1/2]`` and
``U = Pbar - F`` is stepped with the source frozen at ``T_n``:

.. math::

    b = G + 2\epsilon\hat\beta\psi Q,\qquad
    Q = U U_{TT} + U_T^2 + U_{TT} F + 2 U_T F_T + U F_{TT},

    G = -F_{TT} - \bar{\mathcal L} F + 2\epsilon\hat\beta\psi (F_T^2 + F F_{TT}).

``U_TT`` is the backward difference of ``U_T`` sine spectra across one
step, taken before the ``U_T`` filter so that the filter does not leak into
it.  Sigma factors with powers that grow in time filter the ``U_T``
spectrum after each step and the ``U_TT`` difference before it is used.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from singsurf.kss import (BACKENDS, CostCounter, Grid1D, KrylovConvergenceError, NodePair,
                          Operator1D, WavePropagator, WaveState)
from singsurf.lift import LiftSample, QuarticShapes, quartic_shapes
from singsurf.specfun import dst_forward, dst_inverse, sigma_factors
from singsurf.surface import ALPHA_LIMIT, LweParams, lwe_front, lwe_front_inverse, lwe_jumps

__all__ = [
    "CoordinateMap",
    "ReducedOperator",
    "SigmaSchedule",
    "LweConfig",
    "LweSnapshot",
    "LweResult",
    "LweBreakdown",
    "build_map",
    "LweLift",
    "assemble_source",
    "spectral_utt",
    "solve_lwe",
    "lagrange_resample",
    "lwe_default_schedule",
    "threshold_front",
    "measure_front",
    "measure_front_slope",
    "fit_front",
    "theory_front_slope",
    "oscillation_index",
    "REFERENCE_GRID",
    "FIT_WINDOW",
]

# grid size the default sigma exponents are tuned for
REFERENCE_GRID = 262144
# behind-front fit window in cells: clear of the dispersive layer at the kink
FIT_WINDOW = (20.0, 80.0)


# {{{ coordinate map and operator

@dataclass(frozen=True)
class CoordinateMap:
    """``Y = phi(X)`` and the factor ``psi`` for a given ``alpha``."""

    alpha: float

    @property
    def K(self) -> float:
        return -0.5 * self.alpha

    @property
    def small(self) -> bool:
        return abs(self.K) < ALPHA_LIMIT

    @property
    def C(self) -> float:
        """Homogenized wave speed ``K / (1 - exp(-K))``."""
        K = self.K
        if self.small:
            return 1.0 + K / 2.0 + K * K / 12.0
        return K / -math.expm1(-K)

    def phi(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        K = self.K
        if self.small:
            # first-order correction in K
            return X + 0.5 * K * X * (1.0 - X)
        return np.expm1(-K * X) / math.expm1(-K)

    def phi_inverse(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        K = self.K
        if self.small:
            return Y - 0.5 * K * Y * (1.0 - Y)
        return -np.log1p(Y * math.expm1(-K)) / K

    def dphi(self, X) -> np.ndarray:
        """``phi'(X) = C exp(-K X)``."""
        return self.C * np.exp(-self.K * np.asarray(X, dtype=float))

    def psi_of_x(self, X) -> np.ndarray:
        """``psi`` as a function of ``X``: ``exp(alpha X / 4)``."""
        return np.exp(0.25 * self.alpha * np.asarray(X, dtype=float))

    def psi(self, Y) -> np.ndarray:
        """``exp(int_0^Y a1~ / (2 C^2) dY')``, which equals ``exp(alpha phi^-1(Y) / 4)``."""
        return self.psi_of_x(self.phi_inverse(Y))


@dataclass(frozen=True)
class ReducedOperator:
    """Coefficients of ``Lbar = -a2 d^2/dY^2 + a0(Y)``."""

    cmap: CoordinateMap

    @property
    def a2(self) -> float:
        return self.cmap.C**2

    def a1_tilde(self, Y) -> np.ndarray:
        m = self.cmap
        return 0.5 * m.alpha * m.C * np.exp(m.K * m.phi_inverse(Y))

    def a1_tilde_prime(self, Y) -> np.ndarray:
        """``d a1~/dY = (alpha K / 2) exp(2 K X)``, from ``dY/dX = C exp(-K X)``."""
        m = self.cmap
        return 0.5 * m.alpha * m.K * np.exp(2.0 * m.K * m.phi_inverse(Y))

    def a0(self, Y) -> np.ndarray:
        return self.a1_tilde(Y) ** 2 / (4.0 * self.a2) - 0.5 * self.a1_tilde_prime(Y)

    def operator(self, grid: Grid1D) -> Operator1D:
        return Operator1D(self.a2, self.a0(grid.points), grid.dx)


def build_map(p: LweParams) -> tuple[CoordinateMap, ReducedOperator]:
    """Coordinate map and reduced operator for ``p.alpha``."""
    cmap = CoordinateMap(p.require_alpha())
    return cmap, ReducedOperator(cmap)

# }}}


# {{{ lift and source

class LweLift:
    """Quartic lift of ``sin(pi T)`` on ``[0, cutoff]`` with ``G(0, T) = 0``.

    Vanishing of ``G`` at ``Y = 0`` (where ``psi = 1``) fixes

    .. math::

        f_2 = \\frac{(\\bar a_0(0) - \\pi^2)\\sin\\pi T
                     - 2\\epsilon\\hat\\beta\\pi^2\\cos 2\\pi T}{2 C^2}.

    ``nonlinear_psi=False`` drops the factor ``psi`` from the nonlinear
    terms, giving the variant in which it is omitted.
    """

    def __init__(self, p: LweParams, red: ReducedOperator, cutoff: float = 0.5,
                 nonlinear_psi: bool = True):
        if not 0 < cutoff < 1:
            raise ValueError(f"lift cutoff must lie in (0, 1), got {cutoff}")
        self.p = p
        self.red = red
        self.shapes: QuarticShapes = quartic_shapes(cutoff)
        self.eb = p.epsilon * p.beta_hat
        self.a0_left = float(red.a0(0.0))
        self.nonlinear_psi = nonlinear_psi

    def boundary(self, T: float):
        """Derivatives ``k = 0, 1, 2`` of ``f0`` and ``f2`` at ``T``."""
        pi = math.pi
        s, c = math.sin(pi * T), math.cos(pi * T)
        s2, c2 = math.sin(2 * pi * T), math.cos(2 * pi * T)
        f0 = np.array([s, pi * c, -pi * pi * s])
        a = (self.a0_left - pi * pi) / (2.0 * self.red.a2)
        b = -2.0 * self.eb * pi * pi / (2.0 * self.red.a2)
        f2 = np.array([a * s + b * c2,
                       a * pi * c - b * 2 * pi * s2,
                       -a * pi * pi * s - b * 4 * pi * pi * c2])
        return f0, f2

    def sample(self, Y, T: float, psi=None, a0=None) -> LiftSample:
        sh = self.shapes
        A, B = sh.shape_a(Y), sh.shape_b(Y)
        f0, f2 = self.boundary(T)
        F = f0[0] * A + f2[0] * B
        F_t = f0[1] * A + f2[1] * B
        F_tt = f0[2] * A + f2[2] * B
        F_yy = f0[0] * sh.shape_a(Y, 2) + f2[0] * sh.shape_b(Y, 2)
        a0 = self.red.a0(Y) if a0 is None else a0
        w = self._nl_weight(Y, psi)
        G = -F_tt + self.red.a2 * F_yy - a0 * F + 2.0 * self.eb * w * (F_t * F_t + F * F_tt)
        return LiftSample(F, F_t, F_tt, F_yy, G)

    def _nl_weight(self, Y, psi):
        if not self.nonlinear_psi:
            return 1.0
        return self.red.cmap.psi(Y) if psi is None else psi


def assemble_source(eps_beta_hat: float, psi, state: WaveState, lift: LiftSample,
                    utt) -> np.ndarray:
    """Frozen source ``b = G + 2 eps beta_hat psi Q`` at the state's time.

    ``psi`` may be the scalar 1 to drop the factor from the nonlinear term.
    """
    U, Ut = state.u, state.ut
    Q = (U * utt + Ut * Ut + utt * lift.F + 2.0 * Ut * lift.F_t + U * lift.F_tt)
    return lift.G + 2.0 * eps_beta_hat * psi * Q


def spectral_utt(ut_hat, prev_ut_hat, dt: float, filt=None) -> np.ndarray:
    """``U_TT`` from the backward difference of ``U_T`` sine spectra, optionally filtered."""
    diff = (np.asarray(ut_hat) - np.asarray(prev_ut_hat)) / dt
    if filt is not None:
        diff = filt * diff
    return dst_inverse(diff)

# }}}


# {{{ driver

@dataclass(frozen=True)
class SigmaSchedule:
    """Sigma-factor powers for the ``U_T`` spectrum and the ``U_TT`` difference."""

    power_ut: Callable[[float], float]
    power_utt: Callable[[float], float]
    label: str = "custom"

    @classmethod
    def increasing(cls, t_end: float, w_ut: float = 1536.0, w_utt: float = 16384.0,
                   scale: float = 1.0):
        """``scale * w_ut T/t_end`` and ``scale * w_utt (T/t_end)^2``."""
        if not t_end > 0:
            raise ValueError(f"t_end must be positive, got {t_end}")
        a, b = scale * w_ut, scale * w_utt
        return cls(lambda T: a * T / t_end, lambda T: b * (T / t_end) ** 2,
                   f"increasing({a:g},{b:g})")

    @classmethod
    def utt_only(cls, power: float):
        return cls(lambda T: 0.0, lambda T: power, f"utt_only({power:g})")

    @classmethod
    def none(cls):
        return cls(lambda T: 0.0, lambda T: 0.0, "none")


def lwe_default_schedule(t_end: float, n: int, w_ut: float = 1536.0,
                         w_utt: float = 16384.0) -> SigmaSchedule:
    """Increasing schedule with the ``U_T`` weight scaled by ``n / 262144``.

    The ``U_T`` filter acts on the state every step, so its smoothing
    accumulates: ``sum(power) dY^2 / 3`` is the squared Gaussian width.
    Scaling ``w_ut`` with ``n`` keeps that width fixed in ``Y``.  The
    ``U_TT`` filter only damps the lagged difference fed back into the
    source; the feedback is unstable near ``omega dT ~ 1``, a fixed
    normalized frequency at fixed CFL, so ``w_utt`` is left unscaled.
    """
    return SigmaSchedule.increasing(t_end, w_ut * n / REFERENCE_GRID, w_utt)


@dataclass
class LweConfig:
    """Parameters of one Westervelt run.

    ``alpha=None`` in ``params`` selects ``alpha_bullet``.  ``t_end=None``
    selects the time at which the front reaches ``X = 0.95``.  The default
    schedule is :func:`lwe_default_schedule`.
    """

    params: LweParams = field(default_factory=LweParams)
    n: int = 8192
    cfl: float = 10.0
    t_end: float | None = None
    backend: str = "kss"
    schedule: SigmaSchedule | None = None
    snapshots: tuple[float, ...] = (0.3, 0.6)
    lift_cutoff: float = 0.5
    nonlinear_psi: bool = True
    tol: float = 1e-4
    k_max: int = 40

    def __post_init__(self):
        if self.params.alpha is None:
            self.params = self.params.with_bullet_alpha()
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if not self.cfl > 0:
            raise ValueError(f"cfl must be positive, got {self.cfl}")
        if self.t_end is None:
            self.t_end = lwe_front_inverse(self.params, 0.95)
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        for T in self.snapshots:
            if not 0 <= T <= self.t_end:
                raise ValueError(f"snapshot time {T:g} outside [0, t_end = {self.t_end:g}]")
        if self.schedule is None:
            self.schedule = lwe_default_schedule(lwe_front_inverse(self.params, 0.95), self.n)

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.n, 1.0)

    @property
    def time_step(self) -> float:
        return self.cfl * self.grid.dx


@dataclass
class LweSnapshot:
    T: float
    X: np.ndarray
    P: np.ndarray


@dataclass
class LweResult:
    config: LweConfig
    snapshots: list[LweSnapshot]
    counter: CostCounter
    steps: int
    elapsed: float
    truncated_at: float | None = None

    def at(self, T: float) -> LweSnapshot:
        best = min(self.snapshots, key=lambda s: abs(s.T - T))
        if abs(best.T - T) > 1e-9 * max(1.0, abs(T)):
            raise KeyError(f"no snapshot at T = {T:g}")
        return best


class LweBreakdown(RuntimeError):
    """A Krylov backend failed mid-run; ``partial`` holds the snapshots taken so far."""

    def __init__(self, message, partial: LweResult, step: int, time: float):
        super().__init__(message)
        self.partial = partial
        self.step = step
        self.time = time


def lagrange_resample(y_nodes, values, y_targets) -> np.ndarray:
    """Four-point Lagrange interpolation from increasing ``y_nodes`` to ``y_targets``."""
    y = np.asarray(y_nodes, dtype=float)
    v = np.asarray(values, dtype=float)
    t = np.asarray(y_targets, dtype=float)
    if y.size < 4:
        raise ValueError("need at least four nodes")
    i = np.clip(np.searchsorted(y, t, side="right") - 1, 1, y.size - 3)
    idx = i[:, None] + np.arange(-1, 3)[None, :]
    yy = y[idx]
    out = np.zeros_like(t)
    for j in range(4):
        w = np.ones_like(t)
        for m in range(4):
            if m != j:
                w *= (t - yy[:, m]) / (yy[:, j] - yy[:, m])
        out += w * v[idx[:, j]]
    return out


class _LweStepper:
    def __init__(self, cfg: LweConfig, counter: CostCounter):
        self.cfg = cfg
        p = cfg.params
        self.grid = cfg.grid
        self.cmap, self.red = build_map(p)
        self.op = self.red.operator(self.grid)
        self.nodes = NodePair.from_operator(self.op)
        self.Y = self.grid.points
        self.psi = self.cmap.psi(self.Y)
        self.a0 = self.op.a0
        self.lift = LweLift(p, self.red, cfg.lift_cutoff, cfg.nonlinear_psi)
        self.eb = p.epsilon * p.beta_hat
        self.nl_psi = self.psi if cfg.nonlinear_psi else 1.0
        self.counter = counter
        self._props: dict[float, WavePropagator] = {}
        # uniform output grid and its images
        self.X_out = self.grid.full_points
        self.Y_nodes = self.grid.full_points
        self.Y_targets = self.cmap.phi(self.X_out)
        self.Y_targets[0], self.Y_targets[-1] = 0.0, 1.0
        self.psi_out = self.cmap.psi_of_x(self.X_out)

    def propagator(self, dt: float) -> WavePropagator:
        key = round(dt, 15)
        if key not in self._props:
            self._props[key] = WavePropagator(self.op, dt, self.cfg.backend, self.nodes,
                                              tol=self.cfg.tol, k_max=self.cfg.k_max,
                                              counter=self.counter)
        return self._props[key]

    def lift_at(self, T: float) -> LiftSample:
        return self.lift.sample(self.Y, T, psi=self.psi, a0=self.a0)

    def initial(self) -> WaveState:
        s = self.lift_at(0.0)
        return WaveState(-s.F, -s.F_t, 0.0)

    def source(self, state: WaveState, utt) -> np.ndarray:
        return assemble_source(self.eb, self.nl_psi, state, self.lift_at(state.t), utt)

    def filt(self, power: float):
        return sigma_factors(self.grid.n, power) if power > 0 else None

    def physical(self, state: WaveState, T: float) -> np.ndarray:
        pbar = state.u + self.lift_at(T).F
        full = np.concatenate([[math.sin(math.pi * T)], pbar, [0.0]])
        return self.psi_out * lagrange_resample(self.Y_nodes, full, self.Y_targets)


def solve_lwe(cfg: LweConfig) -> LweResult:
    """Integrate to ``cfg.t_end`` and record ``P`` on the uniform X-grid at the snapshots.

    A non-finite state (expected as ``T`` approaches the blow-up time)
    stops the run and sets ``truncated_at``; later snapshots are omitted.

    Raises
    ------
    LweBreakdown
        If a Krylov backend fails to converge; carries the snapshots taken.
    """
    start = time.perf_counter()
    counter = CostCounter()
    st = _LweStepper(cfg, counter)
    dt = cfg.time_step
    n_steps = int(math.floor(cfg.t_end / dt + 1e-9))
    pending = sorted(set(float(T) for T in cfg.snapshots))
    snaps: list[LweSnapshot] = []
    sched = cfg.schedule
    result = LweResult(cfg, snaps, counter, 0, 0.0)

    def record(state: WaveState, T: float):
        snaps.append(LweSnapshot(T, st.X_out, st.physical(state, T)))

    state = st.initial()
    # the first step sees U_TT = 0
    utt = np.zeros(st.grid.n)
    prev_hat = dst_forward(state.ut)
    k = 0
    try:
        for k in range(n_steps):
            T = k * dt
            src = st.source(state, utt)
            upto = (k + 1) * dt - 1e-12 * max(1.0, (k + 1) * dt)
            while pending and pending[0] < upto:
                Tp = pending.pop(0)
                rem = Tp - T
                record(state if rem <= 1e-12 * max(1.0, Tp)
                       else st.propagator(rem).step(state, src), Tp)
            state = st.propagator(dt).step(state, src)
            state.t = (k + 1) * dt
            if not (np.all(np.isfinite(state.u)) and np.all(np.isfinite(state.ut))):
                result.truncated_at = state.t
                pending.clear()
                break
            # difference the propagated U_T against the step input, so the
            # U_T filter below never leaks into U_TT
            ut_hat = dst_forward(state.ut)
            utt = spectral_utt(ut_hat, prev_hat, dt, st.filt(sched.power_utt(state.t)))
            f_ut = st.filt(sched.power_ut(T))
            if f_ut is not None:
                ut_hat = f_ut * ut_hat
                state.ut = dst_inverse(ut_hat)
            prev_hat = ut_hat
        else:
            k = n_steps
            src = st.source(state, utt)
            while pending:
                Tp = pending.pop(0)
                rem = Tp - state.t
                record(state if rem <= 1e-12 * max(1.0, Tp)
                       else st.propagator(rem).step(state, src), Tp)
    except KrylovConvergenceError as exc:
        result.steps = k
        result.elapsed = time.perf_counter() - start
        raise LweBreakdown(f"Krylov backend failed at step {k} (T = {k * dt:.6g}): {exc}",
                           result, k, k * dt) from exc
    result.steps = k
    result.elapsed = time.perf_counter() - start
    return result

# }}}


# {{{ measurement

def threshold_front(X, P, floor: float = 1e-2) -> float:
    """Right-most ``X`` with ``|P| > floor * max|P|`` (first hit scanning right to left)."""
    X = np.asarray(X, dtype=float)
    mag = np.abs(np.asarray(P, dtype=float))
    above = np.nonzero(mag > floor * mag.max())[0]
    return float(X[above[-1]]) if above.size else float(X[0])


def measure_front(X, P, dx: float, window: tuple[float, float] = (2.0, 12.0),
                  floor: float = 1e-2, iterations: int = 8) -> float:
    """Front of an acceleration wave by extrapolating the tangent line to zero.

    Starts from :func:`threshold_front`, fits a line to ``P`` over
    ``[front - window[1] dx, front - window[0] dx]`` and moves the front to
    the zero of that line; repeated ``iterations`` times.
    """
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    front = threshold_front(X, P, floor)
    for _ in range(iterations):
        lo, hi = front - window[1] * dx, front - window[0] * dx
        mask = (X >= lo) & (X <= hi)
        if mask.sum() < 2:
            break
        slope, icpt = np.polyfit(X[mask], P[mask], 1)
        if slope == 0:
            break
        front = float(-icpt / slope)
    return front


def measure_front_slope(X, P, front: float, dx: float,
                        window: tuple[float, float] = (2.0, 12.0)) -> float:
    """Least-squares slope of ``P`` over ``[front - window[1] dx, front - window[0] dx]``.

    Raises
    ------
    ValueError
        If ``front`` is outside ``(0, 1)`` or the window holds fewer than two samples.
    """
    if not 0.0 < front < 1.0:
        raise ValueError(f"front position must lie in (0, 1), got {front}")
    if not 0 <= window[0] < window[1]:
        raise ValueError(f"window must satisfy 0 <= near < far, got {window}")
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    lo, hi = front - window[1] * dx, front - window[0] * dx
    if lo < X[0]:
        raise ValueError("slope window extends past X = 0")
    mask = (X >= lo) & (X <= hi)
    if mask.sum() < 2:
        raise ValueError("slope window holds fewer than two samples")
    return float(np.polyfit(X[mask], P[mask], 1)[0])


def fit_front(X, P, dx: float, window: tuple[float, float] = FIT_WINDOW) -> tuple[float, float]:
    """Front and behind-front slope from one line fit over ``window`` cells.

    The front is the zero of the fitted line, so both numbers describe the
    same tangent line.
    """
    front = measure_front(X, P, dx, window)
    return front, measure_front_slope(X, P, front, dx, window)


def oscillation_index(X, P, center: float, half_width: float = 0.02) -> float:
    """Total variation over range of ``P`` on ``|X - center| <= half_width``.

    Equals 1 for a monotone window and grows with every extra wiggle; a flat
    window gives 1.
    """
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    w = P[np.abs(X - center) <= half_width]
    if w.size < 2:
        raise ValueError("oscillation window holds fewer than two samples")
    span = float(w.max() - w.min())
    if span == 0.0:
        return 1.0
    return float(np.abs(np.diff(w)).sum()) / span


def theory_front_slope(p: LweParams, T: float) -> tuple[float, float]:
    """``(ram(T), [[P_X]](T))`` for the tangent-line overlay."""
    return lwe_front(p, T)[0], lwe_jumps(p, T).jump_px

# }}}
