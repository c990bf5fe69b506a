"""Special functions and transforms shared by the solvers.

* :func:`lambert_w` -- real branches ``W_0`` and ``W_{-1}`` by Halley iteration.
* :func:`bessel_i1`, :func:`bessel_i1e` -- modified Bessel function of the
  first kind, order one (plain and exponentially scaled).
* :func:`dst_forward`, :func:`dst_inverse` -- orthonormal DST-I pair.
* :func:`sigma_factors` -- Lanczos sigma factors raised to a power.

Sine transform convention
-------------------------
For interior samples ``v_i = v(i h)``, ``i = 1..N`` with ``h = l/(N+1)``::

    V_k = sqrt(2/(N+1)) * sum_i v_i sin(pi k i / (N+1)),   k = 1..N

The matrix of this map is symmetric and orthogonal, so the forward and
inverse transforms coincide and ``||V|| == ||v||``.  Samples of
``sin(pi k x / l)`` map to ``sqrt((N+1)/2)`` times the unit vector ``e_k``.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np
import scipy.fft

__all__ = [
    "RealBranch",
    "DomainError",
    "lambert_w",
    "bessel_i1",
    "bessel_i1e",
    "dst_forward",
    "dst_inverse",
    "dst_mode_scale",
    "sigma_factors",
]

_INV_E = math.exp(-1.0)


class DomainError(ValueError):
    """Argument outside the domain of a real-valued special function."""


class RealBranch(str, Enum):
    PRINCIPAL = "principal"
    NEGATIVE_ONE = "negative_one"


# {{{ Lambert W

def _lambert_guess(branch: RealBranch, x: float) -> float:
    # branch-point series in p = sqrt(2(e x + 1))
    p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
    if branch is RealBranch.PRINCIPAL:
        if x < -0.32:
            return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
        if x < 3.0:
            l1 = math.log1p(x)
            return l1 * (1.0 - math.log1p(l1) / (2.0 + l1))
        l1 = math.log(x)
        l2 = math.log(l1)
        return l1 - l2 + l2 / l1

    if x < -0.25:
        return -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p**3
    l1 = math.log(-x)
    l2 = math.log(-l1)
    return l1 - l2 + l2 / l1


def lambert_w(branch: RealBranch | str, x: float, maxiter: int = 50) -> float:
    """Real Lambert W function, the inverse of ``w * exp(w)``.

    Parameters
    ----------
    branch
        ``"principal"`` (``w >= -1``, defined for ``x >= -1/e``) or
        ``"negative_one"`` (``w <= -1``, defined for ``-1/e <= x < 0``).
    x
        Argument.
    maxiter
        Cap on Halley iterations.

    Raises
    ------
    DomainError
        If ``x`` is outside the domain of the requested branch.
    """
    branch = RealBranch(branch)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"lambert_w: non-finite argument {x!r}")
    # allow a few ulps of slack at the branch point
    if x < -_INV_E * (1.0 + 4.0 * np.finfo(float).eps):
        raise DomainError(f"lambert_w: x = {x!r} < -1/e")
    if branch is RealBranch.NEGATIVE_ONE and x >= 0.0:
        raise DomainError(f"lambert_w(negative_one): x = {x!r} must be < 0")

    if x == 0.0:
        return 0.0
    if x <= -_INV_E:
        return -1.0

    w = _lambert_guess(branch, x)
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4.0 * np.finfo(float).eps * (1.0 + abs(w)):
            break

    # keep the result on the requested side of the branch point
    if branch is RealBranch.PRINCIPAL:
        return max(w, -1.0)
    return min(w, -1.0)

# }}}


# {{{ Bessel I_1

_SERIES_CUTOFF = 15.0


def _i1_series(x: float) -> float:
    if x == 0.0:
        return 0.0
    half = 0.5 * x
    q = half * half
    term = half
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        total += term
        if term <= 1e-17 * total:
            return total


def _i1e_asymptotic(x: float) -> float:
    # e^{-x} I_1(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(1) / x^k
    mu = 4.0
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 60):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-17 * abs(total):
            break
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i1e(x: float) -> float:
    """Exponentially scaled Bessel function ``exp(-x) * I_1(x)`` for ``x >= 0``."""
    x = float(x)
    if x < 0.0:
        raise DomainError(f"bessel_i1e: x = {x!r} must be nonnegative")
    if x <= _SERIES_CUTOFF:
        return math.exp(-x) * _i1_series(x)
    return _i1e_asymptotic(x)


def bessel_i1(x: float) -> float:
    """Modified Bessel function of the first kind of order one, ``x >= 0``.

    Power series up to ``x = 15``, large-argument expansion above.  Overflows
    to ``inf`` past ``x ~ 713``; use :func:`bessel_i1e` there.
    """
    x = float(x)
    if x < 0.0:
        raise DomainError(f"bessel_i1: x = {x!r} must be nonnegative")
    if x <= _SERIES_CUTOFF:
        return _i1_series(x)
    if x > 700.0:
        return math.inf
    return math.exp(x) * _i1e_asymptotic(x)

# }}}


# {{{ sine transform

def dst_forward(values, expected_length: int | None = None) -> np.ndarray:
    """Orthonormal DST-I of interior samples (see module docstring)."""
    v = np.asarray(values, dtype=float)
    _check_length(v, expected_length)
    return scipy.fft.dst(v, type=1, norm="ortho")


def dst_inverse(coefficients, expected_length: int | None = None) -> np.ndarray:
    """Inverse of :func:`dst_forward` (the same orthonormal DST-I)."""
    c = np.asarray(coefficients, dtype=float)
    _check_length(c, expected_length)
    return scipy.fft.dst(c, type=1, norm="ortho")


def dst_mode_scale(n: int) -> float:
    """Coefficient produced by :func:`dst_forward` for one unit sine mode."""
    return math.sqrt(0.5 * (n + 1))


def _check_length(v: np.ndarray, expected: int | None) -> None:
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"sine transform needs a 1-D sequence of length >= 2, got shape {v.shape}")
    if expected is not None and v.size != expected:
        raise ValueError(f"length mismatch: got {v.size}, expected {expected}")

# }}}


def sigma_factors(n_modes: int, power: float) -> np.ndarray:
    """Lanczos sigma factors ``sinc(k/(N+1))**power`` for ``k = 1..N``."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if power < 0:
        raise ValueError(f"sigma factor power must be nonnegative, got {power}")
    if power == 0:
        return np.ones(n_modes)
    k = np.arange(1, n_modes + 1)
    # pow keeps the relative error at a few ulps even for large powers
    return np.power(np.sinc(k / (n_modes + 1.0)), float(power))
