"""Closed-form singular-surface results.

Two configurations are covered:

* the linear shock generated by a cosine signal entering an isothermal
  atmosphere with Rayleigh damping (:class:`IsothermalShockParams`);
* the acceleration wave of the dimensionless inhomogeneous
  Lighthill-Westervelt problem (:class:`LweParams`).

Jumps follow the behind-minus-ahead convention ``[[F]] = F^- - F^+``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from singsurf.specfun import RealBranch, lambert_w

__all__ = [
    "IsothermalShockParams",
    "LweParams",
    "shock_amplitude",
    "shock_front",
    "CriticalEpsilonError",
    "BreakdownError",
    "LweCritical",
    "LweTimes",
    "JumpValues",
    "JumpReport",
    "lwe_critical",
    "lwe_times",
    "lwe_limit_alpha0",
    "lwe_front",
    "lwe_front_inverse",
    "lwe_jumps",
    "jump_report",
    "jump_identities",
]

EPS_BULLET_TOL = 1e-10
ALPHA_LIMIT = 1e-7


class CriticalEpsilonError(ValueError):
    """``epsilon`` equals ``1/(pi beta_hat)``, where ``alpha_bullet`` vanishes."""


class BreakdownError(ValueError):
    """Requested time lies beyond the wave-front breakdown ``1 + alpha T/2 <= 0``."""


# {{{ isothermal shock

@dataclass(frozen=True)
class IsothermalShockParams:
    """Physical constants of the isothermal-atmosphere signaling problem (SI units).

    ``mu_hat=None`` selects twice the critical damping ``gamma g / c0``.
    """

    c0: float = 347.26
    gamma: float = 1.40
    g: float = 9.81
    mu_hat: float | None = None
    omega: float = 2.0 * math.pi
    W0: float = 1.0

    def __post_init__(self):
        if self.mu_hat is None:
            object.__setattr__(self, "mu_hat", 2.0 * self.gamma * self.g / self.c0)
        for name in ("c0", "omega", "W0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.g >= 0:
            raise ValueError(f"g must be nonnegative, got {self.g}")
        if not 1.0 < self.gamma <= 5.0 / 3.0:
            raise ValueError(f"gamma must lie in (1, 5/3], got {self.gamma}")
        if not self.mu_hat > 0:
            raise ValueError(f"mu_hat must be positive, got {self.mu_hat}")

    @property
    def mu_c(self) -> float:
        """Critical damping ``gamma g / c0`` (equals ``c0 / H``)."""
        return self.gamma * self.g / self.c0

    @property
    def H(self) -> float:
        """Scale height ``c0^2 / (gamma g)``."""
        return self.c0**2 / (self.gamma * self.g)

    def with_(self, **kw) -> "IsothermalShockParams":
        return replace(self, **kw)


def shock_amplitude(p: IsothermalShockParams, t):
    """Jump ``W0 exp(-(mu_hat - mu_c) t / 2)`` carried by the shock front."""
    return p.W0 * np.exp(-0.5 * (p.mu_hat - p.mu_c) * np.asarray(t, dtype=float))


def shock_front(p: IsothermalShockParams, t):
    """Front position ``c0 t``."""
    return p.c0 * np.asarray(t, dtype=float)

# }}}


# {{{ Lighthill-Westervelt acceleration waves

@dataclass(frozen=True)
class LweParams:
    """Dimensionless parameters: adiabatic index, peak-pressure ratio, inhomogeneity."""

    gamma: float = 1.40
    epsilon: float = 0.35
    alpha: float | None = None

    def __post_init__(self):
        if not 1.0 < self.gamma <= 5.0 / 3.0:
            raise ValueError(f"gamma must lie in (1, 5/3], got {self.gamma}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def beta(self) -> float:
        return 0.5 * (self.gamma + 1.0)

    @property
    def beta_hat(self) -> float:
        return 0.5 * (1.0 + 1.0 / self.gamma)

    @property
    def eps_beta_pi(self) -> float:
        return self.epsilon * self.beta_hat * math.pi

    @property
    def epsilon_bullet(self) -> float:
        return 1.0 / (math.pi * self.beta_hat)

    def require_alpha(self) -> float:
        if self.alpha is None:
            raise ValueError("alpha is unset; use with_bullet_alpha() or pass alpha")
        return float(self.alpha)

    def with_alpha(self, alpha: float) -> "LweParams":
        return replace(self, alpha=float(alpha))

    def with_bullet_alpha(self) -> "LweParams":
        return self.with_alpha(lwe_critical(self).alpha_bullet)


@dataclass(frozen=True)
class LweCritical:
    epsilon_bullet: float
    alpha_bullet: float


def lwe_critical(p: LweParams) -> LweCritical:
    """Critical ``epsilon`` and the ``alpha`` for which ``T_1 == T_inf``."""
    eps_b = p.epsilon_bullet
    if abs(p.epsilon - eps_b) <= EPS_BULLET_TOL:
        raise CriticalEpsilonError(
            f"epsilon = {p.epsilon} equals the critical value 1/(pi beta_hat) = {eps_b}")
    a = p.eps_beta_pi
    branch = RealBranch.NEGATIVE_ONE if p.epsilon < eps_b else RealBranch.PRINCIPAL
    arg = max(-a * math.exp(-a), -math.exp(-1.0))
    alpha = -4.0 / 3.0 * (a + lambert_w(branch, arg))
    return LweCritical(eps_b, alpha)


@dataclass(frozen=True)
class LweTimes:
    """Characteristic times; ``t_infty`` is ``None`` when it is not real."""

    t1: float
    t_infty: float | None
    t_f: float
    t_bd: float | None
    alpha_crt: float


def _t1(alpha: float) -> float:
    if abs(alpha) < ALPHA_LIMIT:
        return 1.0 + alpha / 4.0 + alpha**2 / 24.0
    return 2.0 * math.expm1(0.5 * alpha) / alpha


def _t_infty(alpha: float, eps_beta_pi: float) -> float | None:
    a3 = 4.0 * eps_beta_pi / 3.0
    q = alpha / a3
    if abs(alpha) < ALPHA_LIMIT:
        return 2.0 / a3 * (2.0 / 3.0 - q / 9.0 + 4.0 * q * q / 81.0)
    if q < -1.0:
        return None
    if q == -1.0:
        return 2.0 / abs(alpha)
    return 2.0 / alpha * math.expm1(2.0 / 3.0 * math.log1p(q))


def lwe_times(p: LweParams) -> LweTimes:
    """Arrival time ``T_1``, blow-up time ``T_inf``, final time ``T_f`` and friends.

    Raises
    ------
    ValueError
        If ``alpha == 0``; see :func:`lwe_limit_alpha0`.
    """
    alpha = p.require_alpha()
    if alpha == 0.0:
        raise ValueError("lwe_times requires alpha != 0; use lwe_limit_alpha0")
    t1 = _t1(alpha)
    t_inf = _t_infty(alpha, p.eps_beta_pi)
    t_bd = 2.0 / abs(alpha) if alpha < 0 else None
    alpha_crt = -4.0 * p.eps_beta_pi / 3.0

    eps_b = p.epsilon_bullet
    if abs(p.epsilon - eps_b) <= EPS_BULLET_TOL:
        use_t1 = alpha < 0
    else:
        a_b = lwe_critical(p).alpha_bullet
        if p.epsilon < eps_b:
            use_t1 = alpha < 0 or alpha <= a_b
        else:
            use_t1 = alpha < -abs(a_b)
    if use_t1 or t_inf is None:
        t_f = t1
    else:
        t_f = t_inf
    return LweTimes(t1, t_inf, t_f, t_bd, alpha_crt)


def lwe_limit_alpha0(p: LweParams) -> dict:
    """Homogeneous-medium limits: ``T_1 -> 1`` and ``T_inf -> gamma / (eps beta pi)``."""
    return {"t1": 1.0, "t_infty": p.gamma / (p.epsilon * p.beta * math.pi)}


def lwe_front(p: LweParams, T):
    """Wave-front position ``(2/alpha) ln(1 + alpha T/2)`` and its velocity.

    Raises
    ------
    BreakdownError
        Where ``1 + alpha T / 2 <= 0``.
    """
    alpha = p.require_alpha()
    T = np.asarray(T, dtype=float)
    x = 0.5 * alpha * T
    if np.any(1.0 + x <= 0.0):
        raise BreakdownError(f"1 + alpha T/2 <= 0 for alpha = {alpha}: past breakdown")
    if alpha == 0.0:
        pos = T.copy()
    else:
        pos = np.log1p(x) * (2.0 / alpha)
    vel = 1.0 / (1.0 + x)
    if pos.ndim == 0:
        return float(pos), float(vel)
    return pos, vel


def lwe_front_inverse(p: LweParams, X: float) -> float:
    """Time at which the front reaches ``X``."""
    alpha = p.require_alpha()
    if alpha == 0.0:
        return float(X)
    return 2.0 * math.expm1(0.5 * alpha * X) / alpha


@dataclass(frozen=True)
class JumpValues:
    jump_pt: float
    jump_px: float
    blown_up: bool = False


def lwe_jumps(p: LweParams, T: float) -> JumpValues:
    """Acceleration-wave amplitudes ``[[P_T]]`` and ``[[P_X]]`` at time ``T``.

    At or past the blow-up time both are returned as signed infinities with
    ``blown_up=True``.
    """
    alpha = p.require_alpha()
    T = float(T)
    x = 0.5 * alpha * T
    if 1.0 + x <= 0.0:
        raise BreakdownError(f"1 + alpha T/2 <= 0 at T = {T}")
    r = 1.0 + x
    k = 4.0 * p.eps_beta_pi
    # denominator / alpha, free of cancellation as alpha -> 0
    if alpha == 0.0:
        den = 3.0 - 1.5 * k * T / 2.0
    else:
        den = 3.0 - k * math.expm1(1.5 * math.log1p(x)) / alpha
    t_inf = _t_infty(alpha, p.eps_beta_pi) if alpha != 0.0 else lwe_limit_alpha0(p)["t_infty"]
    if den <= 0.0 or (t_inf is not None and T >= t_inf):
        return JumpValues(math.inf, -math.inf, True)
    return JumpValues(3.0 * math.pi * math.sqrt(r) / den,
                      -3.0 * math.pi * r**1.5 / den, False)


@dataclass
class JumpReport:
    """Front kinematics and jump amplitudes sampled over time."""

    times: np.ndarray
    front_position: np.ndarray
    front_velocity: np.ndarray
    jump_pt: np.ndarray
    jump_px: np.ndarray
    t1: float
    t_infty: float | None
    t_f: float
    alpha_crt: float
    t_bd: float | None = None
    blown_up: np.ndarray = field(default=None)

    COLUMNS = ("T", "front_position", "front_velocity", "jump_pt", "jump_px")

    def rows(self) -> Iterable[tuple]:
        return zip(self.times, self.front_position, self.front_velocity,
                   self.jump_pt, self.jump_px)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for row in self.rows():
                w.writerow([f"{v:.17g}" for v in row])


def jump_report(p: LweParams, times) -> JumpReport:
    times = np.asarray(times, dtype=float)
    tm = lwe_times(p)
    pos, vel = lwe_front(p, times)
    jumps = [lwe_jumps(p, T) for T in times]
    return JumpReport(
        times=times,
        front_position=np.atleast_1d(pos),
        front_velocity=np.atleast_1d(vel),
        jump_pt=np.array([j.jump_pt for j in jumps]),
        jump_px=np.array([j.jump_px for j in jumps]),
        t1=tm.t1, t_infty=tm.t_infty, t_f=tm.t_f, alpha_crt=tm.alpha_crt, t_bd=tm.t_bd,
        blown_up=np.array([j.blown_up for j in jumps]),
    )

# }}}


def jump_identities(*, f_minus, f_plus, ft_minus, ft_plus, fxi_minus, fxi_plus,
                    velocity, g_minus=None, g_plus=None, jump_rate=None) -> dict:
    """Residuals of the singular-surface jump identities.

    ``hadamard``  ``d[[F]]/dt - ([[F_t]] + V [[F_xi]])`` (needs ``jump_rate``,
                  the rate of change of ``[[F]]`` seen by an observer on
                  the front)
    ``maxwell``   ``[[F_t]] + V [[F_xi]]``; meaningful only when ``[[F]] = 0``
                  (``maxwell_applicable`` reports that)
    ``product``   ``[[FG]] - (F^+ [[G]] + G^+ [[F]] + [[F]][[G]])`` (needs ``g``)
    """
    required = dict(f_minus=f_minus, f_plus=f_plus, ft_minus=ft_minus, ft_plus=ft_plus,
                    fxi_minus=fxi_minus, fxi_plus=fxi_plus, velocity=velocity)
    missing = [k for k, v in required.items() if v is None]
    if missing:
        raise ValueError(f"jump_identities: missing one-sided data {missing}")
    if (g_minus is None) != (g_plus is None):
        raise ValueError("jump_identities: need both g_minus and g_plus")

    jf = f_minus - f_plus
    jft = ft_minus - ft_plus
    jfx = fxi_minus - fxi_plus
    out = {
        "maxwell": jft + velocity * jfx,
        "maxwell_applicable": bool(np.all(jf == 0)),
    }
    if jump_rate is not None:
        out["hadamard"] = jump_rate - (jft + velocity * jfx)
    if g_minus is not None:
        jg = g_minus - g_plus
        out["product"] = (f_minus * g_minus - f_plus * g_plus) - (
            f_plus * jg + g_plus * jf + jf * jg)
    return out
