r"""Quartic boundary lift shared by the shock and Westervelt solvers.

A lift carries a Dirichlet datum ``f0(t)`` at ``x = 0`` into the interior:

.. math::

    F(x, t) = \sum_{j=0}^{4} f_j(t) x^j \quad (0 \le x \le \tilde\ell),
    \qquad F = 0 \quad (x > \tilde\ell),

with ``F = F_x = F_xx = 0`` at the cutoff so the zero extension is C^2.
``f2`` is supplied by the caller (it encodes the vanishing of the induced
source at ``x = 0``), while ``(f1, f3, f4)`` solve a 3x3 system.  Because
that system is linear in ``(f0, f2)`` the lift factors as

.. math::

    F(x, t) = f_0(t) A(x) + f_2(t) B(x),

so every time derivative of ``F`` is a combination of the two fixed shapes
``A`` and ``B`` with the derivatives of ``f0`` and ``f2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QuarticShapes", "LiftSample", "quartic_shapes"]


@dataclass(frozen=True)
class QuarticShapes:
    """Polynomial coefficients of the two lift shapes on ``[0, cutoff]``.

    ``a`` and ``b`` hold ``(c0, ..., c4)`` for ``A`` (``f0 = 1, f2 = 0``)
    and ``B`` (``f0 = 0, f2 = 1``).
    """

    cutoff: float
    a: np.ndarray
    b: np.ndarray

    def _eval(self, coef, x, deriv):
        poly = np.polynomial.Polynomial(coef)
        if deriv:
            poly = poly.deriv(deriv)
        x = np.asarray(x, dtype=float)
        return np.where(x <= self.cutoff, poly(x), 0.0)

    def shape_a(self, x, deriv: int = 0) -> np.ndarray:
        """``A`` or its ``deriv``-th x-derivative, zero past the cutoff."""
        return self._eval(self.a, x, deriv)

    def shape_b(self, x, deriv: int = 0) -> np.ndarray:
        """``B`` or its ``deriv``-th x-derivative, zero past the cutoff."""
        return self._eval(self.b, x, deriv)

    def coefficients(self, f0: float, f2: float) -> np.ndarray:
        """``(f0, f1, f2, f3, f4)`` of the lift for the given data."""
        return f0 * self.a + f2 * self.b

    def junction_residual(self, f0: float, f2: float) -> float:
        """``|F| + |F_x| + |F_xx|`` at the cutoff, evaluated on the polynomial."""
        poly = np.polynomial.Polynomial(self.coefficients(f0, f2))
        c = self.cutoff
        return float(abs(poly(c)) + abs(poly.deriv(1)(c)) + abs(poly.deriv(2)(c)))


@dataclass
class LiftSample:
    """Lift and its derivatives on a grid at one time."""

    F: np.ndarray
    F_t: np.ndarray
    F_tt: np.ndarray
    F_xx: np.ndarray
    G: np.ndarray


def quartic_shapes(cutoff: float) -> QuarticShapes:
    """Solve the cutoff conditions for both unit data.

    Imposes ``F(c) = F_x(c) = 0`` together with ``F_xx(c) = 0``, the last
    being what a vanishing induced source at the cutoff reduces to once
    ``F`` and its time derivatives vanish there.
    """
    if not cutoff > 0:
        raise ValueError(f"lift cutoff must be positive, got {cutoff}")
    c = float(cutoff)
    # unknowns (f1, f3, f4); rows F, F_x, F_xx at x = c
    mat = np.array([[c, c**3, c**4],
                    [1.0, 3 * c**2, 4 * c**3],
                    [0.0, 6 * c, 12 * c**2]])
    # right-hand sides for (f0, f2) = (1, 0) and (0, 1)
    rhs = np.array([[-1.0, -c * c],
                    [0.0, -2 * c],
                    [0.0, -2.0]])
    sol = np.linalg.solve(mat, rhs)
    a = np.array([1.0, sol[0, 0], 0.0, sol[1, 0], sol[2, 0]])
    b = np.array([0.0, sol[0, 1], 1.0, sol[1, 1], sol[2, 1]])
    return QuarticShapes(c, a, b)
