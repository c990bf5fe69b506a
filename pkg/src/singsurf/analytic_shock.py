r"""Reference solutions of the isothermal-atmosphere signaling problem.

.. math::

    w_{tt} - c_0^2 w_{zz} + \gamma g w_z + \hat\mu w_t = 0,\qquad
    w(0, t) = W_0 H(t) \cos(\omega t),

with quiescent initial data, on the half line.  Provided here: the Laplace
image, the exact time-domain solution (a Bessel-kernel convolution
evaluated by adaptive quadrature), the two-term expansion behind the
front, and the large-time travelling-wave asymptotics.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from singsurf.specfun import bessel_i1e
from singsurf.surface import IsothermalShockParams

__all__ = [
    "QuadratureError",
    "chi",
    "laplace_image",
    "laplace_image_large_s",
    "exact_solution",
    "exact_profile",
    "small_time_approx",
    "large_time_params",
    "large_time_approx",
    "phase_velocity_hf",
]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed; ``estimate`` and ``error`` hold what it reached."""

    def __init__(self, message, estimate=math.nan, error=math.inf):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


def chi(p: IsothermalShockParams) -> float:
    """``chi = sqrt(mu_hat^2 - mu_c^2) / 2``; requires ``mu_hat > mu_c``."""
    if not p.mu_hat > p.mu_c:
        raise ValueError(
            f"mu_hat = {p.mu_hat:g} must exceed the critical damping mu_c = {p.mu_c:g}")
    return 0.5 * math.sqrt(p.mu_hat**2 - p.mu_c**2)


def laplace_image(p: IsothermalShockParams, z: float, s: float) -> float:
    """Exact Laplace-domain solution ``w_bar(z, s)``."""
    if not s > 0:
        raise ValueError(f"Laplace variable must be positive, got {s}")
    if z < 0:
        raise ValueError(f"z must be nonnegative, got {z}")
    x = chi(p)
    root = math.sqrt((s + 0.5 * p.mu_hat) ** 2 - x * x)
    return (p.W0 * s / (s * s + p.omega**2)
            * math.exp(z / (2.0 * p.H) - z / p.c0 * root))


def laplace_image_large_s(p: IsothermalShockParams, z: float, s: float) -> float:
    """Three-term large-``s`` expansion of :func:`laplace_image`."""
    tau = z / p.c0
    d = (p.mu_hat**2 - p.mu_c**2) / 8.0
    brace = (1.0 + d * tau / s
             + (0.5 * d * d * tau * tau - 0.5 * p.mu_hat * d * tau - p.omega**2) / s**2)
    return (p.W0 / s * math.exp(-s * tau) * math.exp(-(p.mu_hat - p.mu_c) * tau / 2.0)
            * brace)


def _quad(f, a, b, tol, limit=400, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=limit, **kw)
        except integrate.IntegrationWarning as exc:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=limit, **kw)
            if err > 10.0 * tol * max(1.0, abs(val)):
                raise QuadratureError(f"quadrature did not converge: {exc}", val, err) from None
    return val


def exact_solution(p: IsothermalShockParams, z: float, t: float, quad_tol: float = 1e-10) -> float:
    r"""Exact ``w(z, t)`` with ``H(0) = 1`` (the front point counts as behind).

    Inverting the Laplace image term by term gives

    .. math::

        w = W_0 e^{z/2H} \Big[ e^{-\hat\mu\tau/2} \cos\omega(t-\tau)
            + \chi\tau \int_\tau^t e^{-\hat\mu\varsigma/2} \cos\omega(t-\varsigma)
              \frac{I_1(\chi\sqrt{\varsigma^2-\tau^2})}{\sqrt{\varsigma^2-\tau^2}}
              \,d\varsigma \Big],

    the growth factor ``exp(z/2H)`` multiplying the convolution term as well
    as the front term.  The convolution integral over ``varsigma in [tau, t]``, ``tau = z/c0``,
    is split at ``min(2 tau, t)``.  On the first piece
    ``varsigma = tau cosh(theta)`` removes the inverse square root, on the
    second the integrand is smooth.

    Raises
    ------
    QuadratureError
        If the adaptive quadrature cannot reach ``quad_tol``.
    """
    if not 0 < quad_tol <= 1e-3:
        raise ValueError(f"quad_tol must lie in (0, 1e-3], got {quad_tol}")
    tau = z / p.c0
    if t < tau:
        return 0.0
    mu, om = p.mu_hat, p.omega
    head = math.exp(-0.5 * (mu - p.mu_c) * tau) * math.cos(om * (t - tau))
    if z == 0.0 or t == tau:
        return p.W0 * head
    x = chi(p)

    def kernel(s, r):
        # exp(-mu s/2) cos(om (t - s)) I_1(x r), kept overflow safe
        return math.exp(-0.5 * mu * s + x * r) * math.cos(om * (t - s)) * bessel_i1e(x * r)

    split = min(2.0 * tau, t)
    theta_max = math.acosh(split / tau)

    def near(theta):
        return kernel(tau * math.cosh(theta), tau * math.sinh(theta))

    def far(s):
        r = math.sqrt(s * s - tau * tau)
        return kernel(s, r) / r

    scale = x * tau
    # the integral multiplies chi tau; tighten the tolerance accordingly
    tol = quad_tol / max(scale, 1e-300)
    tol = min(max(tol, 1e-14), 1e-3)
    total = _quad(near, 0.0, theta_max, tol)
    if t > split:
        npts = int((t - split) * om / math.pi) + 1
        if npts > 40:
            total += _quad(far, split, t, tol, limit=max(400, 4 * npts))
        else:
            total += _quad(far, split, t, tol)
    return p.W0 * (head + math.exp(0.5 * z / p.H) * scale * total)


def exact_profile(p: IsothermalShockParams, z, t: float, quad_tol: float = 1e-8) -> np.ndarray:
    """:func:`exact_solution` evaluated at each point of ``z``."""
    return np.array([exact_solution(p, float(zi), t, quad_tol) for zi in np.atleast_1d(z)])


def small_time_approx(p: IsothermalShockParams, z, t):
    """Two-correction expansion of ``w`` just behind the front; zero ahead of it."""
    z = np.asarray(z, dtype=float)
    tau = z / p.c0
    delta = t - tau
    d = (p.mu_hat**2 - p.mu_c**2) / 8.0
    brace = (1.0 + d * tau * delta
             + 0.5 * (0.5 * d * d * tau * tau - 0.5 * p.mu_hat * d * tau - p.omega**2) * delta**2)
    val = p.W0 * np.exp(-0.5 * (p.mu_hat - p.mu_c) * tau) * brace
    return np.where(delta >= 0, val, 0.0)


def large_time_params(p: IsothermalShockParams) -> tuple[float, float]:
    """Attenuation ``sigma`` and wave number ``varkappa`` of the periodic regime."""
    if not p.mu_hat > p.mu_c:
        raise ValueError("large-time asymptotics need mu_hat > mu_c")
    a = p.mu_c**2 - 4.0 * p.omega**2
    rad = math.hypot(a, 4.0 * p.mu_hat * p.omega)
    sigma = math.sqrt(0.5 * (a + rad)) if a >= 0 else math.sqrt(
        # (a + rad)/2 == 8 mu^2 om^2 / (rad - a), free of cancellation
        8.0 * (p.mu_hat * p.omega) ** 2 / (rad - a))
    kappa = math.sqrt(0.5 * (rad - a)) if a <= 0 else math.sqrt(
        8.0 * (p.mu_hat * p.omega) ** 2 / (rad + a))
    return sigma, kappa


def large_time_approx(p: IsothermalShockParams, z, t):
    """Periodic state ``W0 exp(-(sigma - mu_c) z / 2c0) cos(omega t - varkappa z / 2c0)``."""
    sigma, kappa = large_time_params(p)
    z = np.asarray(z, dtype=float)
    return p.W0 * np.exp(-0.5 * (sigma - p.mu_c) * z / p.c0) * np.cos(
        p.omega * t - 0.5 * kappa * z / p.c0)


def phase_velocity_hf(p: IsothermalShockParams, omega: float | None = None) -> float:
    """High-frequency phase velocity ``c0 (1 - (mu_hat^2 - mu_c^2) / (8 omega^2))``."""
    om = p.omega if omega is None else omega
    if not om > 0:
        raise ValueError("omega must be positive")
    return p.c0 * (1.0 - (p.mu_hat**2 - p.mu_c**2) / (8.0 * om * om))
