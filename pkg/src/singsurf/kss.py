r"""Krylov subspace spectral (KSS) time stepping for ``u_tt = -L u + b``.

``L`` is the centered-difference discretization of ``-a2 d^2/dx^2 + a0(x)``
with homogeneous Dirichlet ends.  A matrix function ``f(L) u`` is
approximated mode by mode in the sine basis: for wave number ``k``, ``f`` is
replaced by the straight line through ``(0, f(0))`` and
``(lambda_k, f(lambda_k))`` where ``lambda_k`` approximates the ``k``-th
eigenvalue of ``L``.  Writing ``S`` for the sine transform,

.. math::

    f(L) u \approx S^{-1} [ B S u + M S (L u) ],

with diagonal intercepts ``B`` and slopes ``M``.  For constant ``a0`` the
sine modes are exact eigenvectors and this coincides with the Fourier
spectral formula ``S^{-1} f(Lambda) S u``.

Backends
--------
``kss``       two-point interpolation above (one operator product per call)
``fourier``   diagonal formula ``S^{-1} f(Lambda) S u``
``lanczos``   Lanczos approximation ``||u|| Q_K f(T_K) e_1``
``expeuler``  Arnoldi approximation of the exponential of the augmented
              first-order system (exponential Euler)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from singsurf.specfun import dst_forward, dst_inverse

__all__ = [
    "BACKENDS",
    "CostCounter",
    "Grid1D",
    "Operator1D",
    "NodePair",
    "WaveState",
    "MatrixFunction",
    "phi_family",
    "forced_response_maps",
    "affine_map",
    "kss_apply",
    "fourier_apply",
    "lanczos_apply",
    "LanczosResult",
    "KrylovConvergenceError",
    "WavePropagator",
    "HarmonicForcing",
    "step_wave",
    "exp_euler_step",
    "discrete_energy",
]

BACKENDS = ("kss", "fourier", "lanczos", "expeuler")

SERIES_THRESHOLD = 1e-4


class KrylovConvergenceError(RuntimeError):
    """Krylov iteration did not reach its tolerance within ``k_max`` steps.

    The last iterate and the iteration count are attached.
    """

    def __init__(self, message, result=None, iterations=0):
        super().__init__(message)
        self.result = result
        self.iterations = iterations


@dataclass
class CostCounter:
    """Tally of operator products and sine transforms."""

    matvecs: int = 0
    transforms: int = 0
    krylov_iterations: list = field(default_factory=list)

    def reset(self):
        self.matvecs = 0
        self.transforms = 0
        self.krylov_iterations.clear()


def _fwd(v, counter):
    if counter is not None:
        counter.transforms += 1
    return dst_forward(v)


def _inv(v, counter):
    if counter is not None:
        counter.transforms += 1
    return dst_inverse(v)


# {{{ grids, operators, nodes

@dataclass(frozen=True)
class Grid1D:
    """Uniform interior mesh ``x_i = i * dx``, ``i = 1..n``, ``dx = length/(n+1)``."""

    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2 interior points, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / (self.n + 1)

    @property
    def points(self) -> np.ndarray:
        return self.dx * np.arange(1, self.n + 1)

    @property
    def full_points(self) -> np.ndarray:
        """Points including both boundaries (``n + 2`` values)."""
        return self.dx * np.arange(self.n + 2)


@dataclass(frozen=True, eq=False)
class Operator1D:
    """``-a2 * D2 + diag(a0)`` with Dirichlet ends, stored in compact form."""

    a2: float
    a0: np.ndarray
    dx: float

    def __post_init__(self):
        a0 = np.array(self.a0, dtype=float)
        a0.setflags(write=False)
        object.__setattr__(self, "a0", a0)
        if not self.a2 > 0:
            raise ValueError(f"a2 must be positive, got {self.a2}")
        if a0.ndim != 1 or a0.size < 2:
            raise ValueError("a0 must be a 1-D array with at least two samples")

    @classmethod
    def constant(cls, a2: float, a0: float, grid: Grid1D) -> "Operator1D":
        return cls(a2, np.full(grid.n, float(a0)), grid.dx)

    @property
    def n(self) -> int:
        return self.a0.size

    @property
    def avg_a0(self) -> float:
        return float(np.mean(self.a0))

    def apply(self, u, counter: CostCounter | None = None) -> np.ndarray:
        if counter is not None:
            counter.matvecs += 1
        u = np.asarray(u, dtype=float)
        d2 = -2.0 * u
        d2[1:] += u[:-1]
        d2[:-1] += u[1:]
        return -self.a2 / self.dx**2 * d2 + self.a0 * u

    def dense(self) -> np.ndarray:
        n = self.n
        c = self.a2 / self.dx**2
        return (np.diag(2.0 * c + self.a0)
                - c * np.eye(n, k=1) - c * np.eye(n, k=-1))


@dataclass(frozen=True, eq=False)
class NodePair:
    """Per-mode interpolation nodes ``lambda1 = 0`` and ``lambda2[k-1]``."""

    lambda2: np.ndarray
    lambda1: float = 0.0

    @classmethod
    def from_operator(cls, op: Operator1D) -> "NodePair":
        n = op.n
        k = np.arange(1, n + 1)
        lam = op.a2 * (2.0 - 2.0 * np.cos(np.pi * k / (n + 1))) / op.dx**2 + op.avg_a0
        if lam[0] <= 0:
            raise ValueError(
                "operator is not positive definite on the sine basis: "
                f"avg(a0) = {op.avg_a0:g} <= -{lam[0] - op.avg_a0:g}")
        lam.setflags(write=False)
        return cls(lam)

# }}}


@dataclass
class WaveState:
    """Field ``u`` and its time derivative ``ut`` at time ``t``."""

    u: np.ndarray
    ut: np.ndarray
    t: float = 0.0

    def copy(self) -> "WaveState":
        return WaveState(self.u.copy(), self.ut.copy(), self.t)


# {{{ scalar maps

@dataclass(frozen=True)
class MatrixFunction:
    """A scalar map ``lambda -> f(lambda)`` applied to symmetric matrices.

    ``value_at_zero`` and ``slope_at_zero`` feed the two-point interpolant
    when a node sits at the origin.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    value_at_zero: float
    slope_at_zero: float

    def __call__(self, lam):
        return self.func(np.asarray(lam, dtype=float))


def _split(lam, t):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    z = lam * t * t
    small = np.abs(z) < SERIES_THRESHOLD
    root = np.sqrt(np.abs(lam))
    return lam, z, small, root


def _trig(lam, t):
    """cos(sqrt(lam) t) and sin(sqrt(lam) t)/sqrt(lam), continued to lam < 0."""
    lam, z, small, root = _split(lam, t)
    c = np.empty_like(lam)
    s = np.empty_like(lam)
    big = ~small
    pos = big & (lam > 0)
    neg = big & (lam < 0)
    c[pos] = np.cos(root[pos] * t)
    s[pos] = np.sin(root[pos] * t) / root[pos]
    c[neg] = np.cosh(root[neg] * t)
    s[neg] = np.sinh(root[neg] * t) / root[neg]
    zs = z[small]
    c[small] = 1.0 - zs / 2.0 + zs**2 / 24.0 - zs**3 / 720.0
    s[small] = t * (1.0 - zs / 6.0 + zs**2 / 120.0 - zs**3 / 5040.0)
    return lam, z, small, c, s


def _one_minus_cos_over_lam(lam, t):
    lam, z, small, root = _split(lam, t)
    out = np.empty_like(lam)
    big = ~small
    pos = big & (lam > 0)
    neg = big & (lam < 0)
    out[pos] = 2.0 * np.sin(0.5 * root[pos] * t) ** 2 / lam[pos]
    out[neg] = -2.0 * np.sinh(0.5 * root[neg] * t) ** 2 / lam[neg]
    zs = z[small]
    out[small] = t * t * (0.5 - zs / 24.0 + zs**2 / 720.0 - zs**3 / 40320.0)
    return out


def phi_family(t: float) -> dict[str, MatrixFunction]:
    """Scalar maps needed by the blocks of ``phi_0`` and ``t*phi_1``.

    Keys: ``cos``, ``sinc`` (``sin(sqrt(l)t)/sqrt(l)``), ``msin``
    (``-sqrt(l) sin(sqrt(l)t)``), ``omc`` (``(1 - cos)/l``), ``cm1``
    (``cos - 1``) and ``one`` (the constant 1).  Each switches to a Taylor
    series when ``|l t^2| < 1e-4``.
    """
    t = float(t)

    def cos_(lam):
        return _trig(lam, t)[3]

    def sinc_(lam):
        return _trig(lam, t)[4]

    def msin_(lam):
        lam, z, small, c, s = _trig(lam, t)
        return -lam * s

    def omc_(lam):
        return _one_minus_cos_over_lam(lam, t)

    def cm1_(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        return -lam * _one_minus_cos_over_lam(lam, t)

    def one_(lam):
        return np.ones_like(np.atleast_1d(np.asarray(lam, dtype=float)))

    return {
        "cos": MatrixFunction("cos", cos_, 1.0, -0.5 * t * t),
        "sinc": MatrixFunction("sinc", sinc_, t, -t**3 / 6.0),
        "msin": MatrixFunction("msin", msin_, 0.0, -t),
        "omc": MatrixFunction("omc", omc_, 0.5 * t * t, -t**4 / 24.0),
        "cm1": MatrixFunction("cm1", cm1_, 0.0, -0.5 * t * t),
        "one": MatrixFunction("one", one_, 1.0, 0.0),
    }


def forced_response_maps(t: float, omega: float, nodes: int = 64) -> dict[str, MatrixFunction]:
    r"""Maps giving the exact response to a harmonic source over one step.

    For ``u'' = -lambda u + g(s)``, ``u(0) = u'(0) = 0``, the state at ``s = t``
    is ``(\int_0^t S(t-s) g(s) ds, \int_0^t C(t-s) g(s) ds)`` with
    ``S = sin(sqrt(l) s)/sqrt(l)``, ``C = cos(sqrt(l) s)``.  Keys ``sc``,
    ``ss``, ``cc``, ``cs`` pair the kernel (first letter) with the weight
    ``cos(omega s)`` or ``sin(omega s)`` (second letter).  The integrals are
    computed by Gauss-Legendre quadrature in ``s``; with the default 64
    nodes this is exact to rounding for ``sqrt(l) t`` up to about 60.
    """
    t = float(t)
    x, wq = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * t * (x + 1.0)
    wq = 0.5 * t * wq
    lag = t - s
    weights = {"c": np.cos(omega * s), "s": np.sin(omega * s)}

    def make(kernel, weight):
        w = wq * weights[weight]

        def f(lam):
            lam = np.atleast_1d(np.asarray(lam, dtype=float))
            # kernels at every (lambda, lag) pair via unit-time maps of lambda lag^2
            c, sn = _trig(np.outer(lam, lag**2).ravel(), 1.0)[3:5]
            vals = c if kernel == "c" else sn * np.tile(lag, lam.size)
            return vals.reshape(lam.size, lag.size) @ w

        if kernel == "c":
            v0, d0 = np.sum(w), -0.5 * np.sum(w * lag**2)
        else:
            v0, d0 = np.sum(w * lag), -np.sum(w * lag**3) / 6.0
        return MatrixFunction(kernel + weight, f, float(v0), float(d0))

    return {kw: make(kw[0], kw[1]) for kw in ("sc", "ss", "cc", "cs")}


def affine_map(c: float, d: float) -> MatrixFunction:
    """``lambda -> c + d * lambda``; the two-point interpolant is exact."""
    return MatrixFunction(
        "affine", lambda lam: c + d * np.asarray(lam, dtype=float), float(c), float(d))


def interpolation_coefficients(f: MatrixFunction, lambda2) -> tuple[np.ndarray, np.ndarray]:
    """Intercepts and slopes of the line through ``(0, f(0))``, ``(l2, f(l2))``."""
    lam = np.asarray(lambda2, dtype=float)
    f0 = f.value_at_zero
    fl = np.asarray(f(lam), dtype=float)
    slope = np.empty_like(lam)
    nz = lam != 0.0
    slope[nz] = (fl[nz] - f0) / lam[nz]
    slope[~nz] = f.slope_at_zero
    return np.full_like(lam, f0), slope

# }}}


# {{{ matrix function-vector products

def kss_apply(f: MatrixFunction, op: Operator1D, nodes: NodePair, u,
              counter: CostCounter | None = None) -> np.ndarray:
    """Second-order KSS approximation of ``f(L) u``.

    One operator product and three sine transforms.
    """
    u = np.asarray(u, dtype=float)
    if u.size != op.n or nodes.lambda2.size != op.n:
        raise ValueError("kss_apply: vector, operator and node sizes differ")
    b, m = interpolation_coefficients(f, nodes.lambda2)
    uhat = _fwd(u, counter)
    luhat = _fwd(op.apply(u, counter), counter)
    return _inv(b * uhat + m * luhat, counter)


def fourier_apply(f: MatrixFunction, nodes: NodePair, u,
                  counter: CostCounter | None = None) -> np.ndarray:
    """Diagonal approximation ``S^{-1} f(Lambda_2) S u``."""
    u = np.asarray(u, dtype=float)
    if u.size != nodes.lambda2.size:
        raise ValueError("fourier_apply: vector and node sizes differ")
    return _inv(f(nodes.lambda2) * _fwd(u, counter), counter)


@dataclass
class LanczosResult:
    result: np.ndarray | list
    iterations: int


def lanczos_apply(f: MatrixFunction | Sequence[MatrixFunction], op: Operator1D, u,
                  tol: float = 1e-4, k_max: int = 40,
                  counter: CostCounter | None = None) -> LanczosResult:
    """Lanczos approximation ``w_K = ||u|| Q_K f(T_K) e_1`` with full reorthogonalization.

    Iterates until ``||w_{K+1} - w_K|| / ||w_{K+1}|| < tol`` for every
    requested function.  ``f`` may be a single map or a sequence sharing
    one Krylov basis; ``result`` mirrors that shape.

    Raises
    ------
    KrylovConvergenceError
        If the tolerance is not met within ``k_max`` iterations.
    """
    single = isinstance(f, MatrixFunction)
    fs = [f] if single else list(f)
    u = np.asarray(u, dtype=float)
    n = u.size
    beta0 = float(np.linalg.norm(u))
    if beta0 == 0.0:
        zeros = [np.zeros(n) for _ in fs]
        return LanczosResult(zeros[0] if single else zeros, 0)

    k_max = min(k_max, n)
    q = np.zeros((k_max + 1, n))
    alpha = np.zeros(k_max)
    beta = np.zeros(k_max)
    q[0] = u / beta0
    prev = None
    coeffs = None
    for k in range(k_max):
        w = op.apply(q[k], counter)
        alpha[k] = q[k] @ w
        w -= alpha[k] * q[k]
        if k > 0:
            w -= beta[k - 1] * q[k - 1]
        # full reorthogonalization, twice is enough
        for _ in range(2):
            w -= q[: k + 1].T @ (q[: k + 1] @ w)
        beta[k] = float(np.linalg.norm(w))

        theta, s = scipy.linalg.eigh_tridiagonal(alpha[: k + 1], beta[:k])
        coeffs = [s @ (np.asarray(g(theta), dtype=float) * s[0]) for g in fs]

        invariant = beta[k] <= 1e-13 * max(1.0, abs(alpha[k]))
        converged = invariant
        if prev is not None and not converged:
            converged = True
            for cnew, cold in zip(coeffs, prev):
                diff = cnew.copy()
                diff[:-1] -= cold
                norm = np.linalg.norm(cnew)
                if norm > 0 and np.linalg.norm(diff) >= tol * norm:
                    converged = False
                    break
        if converged:
            results = [beta0 * (c @ q[: k + 1]) for c in coeffs]
            if counter is not None:
                counter.krylov_iterations.append(k + 1)
            return LanczosResult(results[0] if single else results, k + 1)
        prev = coeffs
        q[k + 1] = w / beta[k]

    results = [beta0 * (c @ q[:k_max]) for c in coeffs]
    raise KrylovConvergenceError(
        f"Lanczos iteration did not converge to tol={tol:g} in {k_max} steps",
        result=results[0] if single else results, iterations=k_max)


def _arnoldi_expm(matvec, v, dt, tol, k_max, counter=None):
    """Arnoldi approximation of ``exp(dt A) v`` for a nonsymmetric operator."""
    beta0 = float(np.linalg.norm(v))
    if beta0 == 0.0:
        return np.zeros_like(v), 0
    m = v.size
    k_max = min(k_max, m)
    V = np.zeros((k_max + 1, m))
    H = np.zeros((k_max + 1, k_max))
    V[0] = v / beta0
    prev = None
    y = None
    for k in range(k_max):
        w = matvec(V[k])
        if counter is not None:
            counter.matvecs += 1
        for _ in range(2):
            h = V[: k + 1] @ w
            w -= V[: k + 1].T @ h
            H[: k + 1, k] += h
        H[k + 1, k] = np.linalg.norm(w)
        y = scipy.linalg.expm(dt * H[: k + 1, : k + 1])[:, 0]
        happy = H[k + 1, k] <= 1e-13 * max(1.0, np.abs(H[: k + 1, k]).max())
        if happy or (prev is not None
                     and np.linalg.norm(np.append(prev, 0.0) - y) < tol * np.linalg.norm(y)):
            if counter is not None:
                counter.krylov_iterations.append(k + 1)
            return beta0 * (y @ V[: k + 1]), k + 1
        prev = y
        V[k + 1] = w / H[k + 1, k]
    raise KrylovConvergenceError(
        f"Arnoldi exponential did not converge to tol={tol:g} in {k_max} steps",
        result=beta0 * (y @ V[:k_max]), iterations=k_max)

# }}}


# {{{ wave propagator

class WavePropagator:
    r"""One-step map for ``u_tt = -L u + b`` with ``b`` frozen over the step.

    .. math::

        u_{n+1}  &= C u_n + \tilde S u'_n + L^{-1}(I - C) b \\
        u'_{n+1} &= -L \tilde S u_n + C u'_n + \tilde S b

    with ``C = cos(sqrt(L) dt)`` and ``S~ = sin(sqrt(L) dt)/sqrt(L)``.  For the
    ``kss`` and ``fourier`` backends the products are evaluated in the sine
    basis with shared transforms, which is algebraically identical to six
    separate :func:`kss_apply` / :func:`fourier_apply` calls.
    """

    def __init__(self, op: Operator1D, dt: float, backend: str = "kss",
                 nodes: NodePair | None = None, tol: float = 1e-4, k_max: int = 40,
                 counter: CostCounter | None = None):
        if backend not in BACKENDS:
            raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
        self.op = op
        self.dt = float(dt)
        self.backend = backend
        self.nodes = nodes if nodes is not None else NodePair.from_operator(op)
        self.tol = tol
        self.k_max = k_max
        self.counter = counter
        self.maps = phi_family(self.dt)
        lam = self.nodes.lambda2
        if backend == "kss":
            self.coef = {key: interpolation_coefficients(self.maps[key], lam)
                         for key in ("cos", "sinc", "msin", "omc")}
        elif backend == "fourier":
            self.diag = {key: self.maps[key](lam) for key in ("cos", "sinc", "msin", "omc")}

    def step_spectral(self, state: WaveState, source=None):
        """Advance one step; return the sine spectra of ``(u, ut)``.

        Only available for the ``kss`` and ``fourier`` backends.
        """
        ctr = self.counter
        u, ut = state.u, state.ut
        has_src = source is not None and np.any(source)
        if self.backend == "kss":
            op = self.op
            uh, luh = _fwd(u, ctr), _fwd(op.apply(u, ctr), ctr)
            vh, lvh = _fwd(ut, ctr), _fwd(op.apply(ut, ctr), ctr)
            (bc, mc), (bs, ms), (bm, mm), (bo, mo) = (
                self.coef["cos"], self.coef["sinc"], self.coef["msin"], self.coef["omc"])
            new_u = bc * uh + mc * luh + bs * vh + ms * lvh
            new_ut = bm * uh + mm * luh + bc * vh + mc * lvh
            if has_src:
                bh, lbh = _fwd(source, ctr), _fwd(op.apply(source, ctr), ctr)
                new_u += bo * bh + mo * lbh
                new_ut += bs * bh + ms * lbh
            return new_u, new_ut
        if self.backend == "fourier":
            d = self.diag
            uh, vh = _fwd(u, ctr), _fwd(ut, ctr)
            new_u = d["cos"] * uh + d["sinc"] * vh
            new_ut = d["msin"] * uh + d["cos"] * vh
            if has_src:
                bh = _fwd(source, ctr)
                new_u += d["omc"] * bh
                new_ut += d["sinc"] * bh
            return new_u, new_ut
        raise ValueError(f"backend {self.backend!r} has no spectral form")

    def step(self, state: WaveState, source=None, filters=None,
             forcing: "HarmonicForcing | None" = None) -> WaveState:
        """Advance one step.

        ``filters`` is an optional pair of per-mode multipliers applied to
        the sine spectra of ``u`` and ``ut`` after the step.  ``forcing``
        adds the exact response to a harmonic source (see
        :class:`HarmonicForcing`) before filtering.
        """
        if self.backend in ("kss", "fourier"):
            new_u, new_ut = self.step_spectral(state, source)
            if forcing is not None:
                du, dut = forcing.spectral(state.t)
                new_u = new_u + du
                new_ut = new_ut + dut
            if filters is not None:
                fu, fut = filters
                if fu is not None:
                    new_u = fu * new_u
                if fut is not None:
                    new_ut = fut * new_ut
            return WaveState(_inv(new_u, self.counter), _inv(new_ut, self.counter),
                             state.t + self.dt)

        if self.backend == "lanczos":
            nxt = self._lanczos_step(state, source)
        else:
            nxt = self._arnoldi_step(state, source)
        if forcing is not None:
            du, dut = forcing.physical(state.t)
            nxt.u += du
            nxt.ut += dut
        if filters is not None:
            fu, fut = filters
            if fu is not None:
                nxt.u = _inv(fu * _fwd(nxt.u, self.counter), self.counter)
            if fut is not None:
                nxt.ut = _inv(fut * _fwd(nxt.ut, self.counter), self.counter)
        return nxt

    def _lanczos_step(self, state, source):
        m = self.maps
        kw = dict(tol=self.tol, k_max=self.k_max, counter=self.counter)
        cu, msu = lanczos_apply([m["cos"], m["msin"]], self.op, state.u, **kw).result
        su, cv = lanczos_apply([m["sinc"], m["cos"]], self.op, state.ut, **kw).result
        new_u = cu + su
        new_ut = msu + cv
        if source is not None and np.any(source):
            ob, sb = lanczos_apply([m["omc"], m["sinc"]], self.op, source, **kw).result
            new_u += ob
            new_ut += sb
        return WaveState(new_u, new_ut, state.t + self.dt)

    def _arnoldi_step(self, state, source):
        n = self.op.n
        src = np.zeros(n) if source is None else np.asarray(source, dtype=float)

        def matvec(v):
            out = np.empty_like(v)
            out[:n] = v[n:2 * n]
            out[n:2 * n] = -self.op.apply(v[:n]) + src * v[-1]
            out[-1] = 0.0
            return out

        v = np.concatenate([state.u, state.ut, [1.0]])
        w, _ = _arnoldi_expm(matvec, v, self.dt, self.tol, self.k_max, self.counter)
        return WaveState(w[:n], w[n:2 * n], state.t + self.dt)


class HarmonicForcing:
    r"""Exact one-step response to ``g_c cos(omega t) + g_s sin(omega t)``.

    Over a step starting at ``t_n`` the source reads
    ``h_1 cos(omega s) + h_2 sin(omega s)`` with
    ``h_1 = g_c cos(omega t_n) + g_s sin(omega t_n)`` and
    ``h_2 = g_s cos(omega t_n) - g_c sin(omega t_n)``, so the added state is

    .. math::

        \Delta u = I_{sc}(L) h_1 + I_{ss}(L) h_2,\qquad
        \Delta u' = I_{cc}(L) h_1 + I_{cs}(L) h_2

    with the maps of :func:`forced_response_maps`.  For the ``kss`` and
    ``fourier`` backends the spectra of ``g_c``, ``g_s`` (and of ``L g``) are
    computed once, so a step costs only per-mode arithmetic.
    """

    def __init__(self, prop: WavePropagator, g_c, g_s, omega: float):
        self.prop = prop
        self.omega = float(omega)
        self.g = (np.asarray(g_c, dtype=float), np.asarray(g_s, dtype=float))
        self.maps = forced_response_maps(prop.dt, omega)
        ctr = prop.counter
        lam = prop.nodes.lambda2
        if prop.backend == "kss":
            ghat = [_fwd(g, ctr) for g in self.g]
            lghat = [_fwd(prop.op.apply(g, ctr), ctr) for g in self.g]
            coef = {k: interpolation_coefficients(m, lam) for k, m in self.maps.items()}
            # per-map spectra of f(L) g_c and f(L) g_s
            self.spec = {k: [b * gh + m * lg for gh, lg in zip(ghat, lghat)]
                         for k, (b, m) in coef.items()}
        elif prop.backend == "fourier":
            ghat = [_fwd(g, ctr) for g in self.g]
            self.spec = {k: [m(lam) * gh for gh in ghat] for k, m in self.maps.items()}
        else:
            self.spec = None

    def _weights(self, t):
        c, s = math.cos(self.omega * t), math.sin(self.omega * t)
        # h1 = c g_c + s g_s, h2 = -s g_c + c g_s
        return (c, s), (-s, c)

    def spectral(self, t: float):
        """Sine spectra of ``(du, dut)`` for a step starting at ``t``."""
        (a1, b1), (a2, b2) = self._weights(t)
        sp = self.spec

        def comb(key, a, b):
            gc, gs = sp[key]
            return a * gc + b * gs
        du = comb("sc", a1, b1) + comb("ss", a2, b2)
        dut = comb("cc", a1, b1) + comb("cs", a2, b2)
        return du, dut

    def physical(self, t: float):
        """``(du, dut)`` on the grid for a step starting at ``t``."""
        if self.spec is not None:
            du, dut = self.spectral(t)
            return _inv(du, self.prop.counter), _inv(dut, self.prop.counter)
        (a1, b1), (a2, b2) = self._weights(t)
        gc, gs = self.g
        h1, h2 = a1 * gc + b1 * gs, a2 * gc + b2 * gs
        p = self.prop
        kw = dict(tol=p.tol, k_max=p.k_max, counter=p.counter)
        m = self.maps
        sc, cc = lanczos_apply([m["sc"], m["cc"]], p.op, h1, **kw).result
        ss, cs = lanczos_apply([m["ss"], m["cs"]], p.op, h2, **kw).result
        return sc + ss, cc + cs


def step_wave(op: Operator1D, nodes: NodePair | None, state: WaveState, source, dt: float,
              backend: str = "kss", counter: CostCounter | None = None) -> WaveState:
    """Advance ``(u, ut)`` by ``dt`` with the frozen source ``source``."""
    if dt == 0:
        return state.copy()
    return WavePropagator(op, dt, backend, nodes=nodes, counter=counter).step(state, source)


def exp_euler_step(op: Operator1D, state: WaveState, source, dt: float,
                   backend: str = "lanczos", tol: float = 1e-4, k_max: int = 40,
                   counter: CostCounter | None = None) -> WaveState:
    """Exponential Euler step with Krylov matrix functions.

    ``backend="lanczos"`` evaluates the blocks of ``phi_0``/``phi_1`` by
    symmetric Lanczos on ``L``; ``backend="arnoldi"`` exponentiates the
    augmented first-order system ``[[J, c], [0, 0]]`` directly.
    """
    if dt == 0:
        return state.copy()
    kind = {"lanczos": "lanczos", "arnoldi": "expeuler", "expeuler": "expeuler"}.get(backend)
    if kind is None:
        raise ValueError(f"exp_euler_step: unknown Krylov backend {backend!r}")
    prop = WavePropagator(op, dt, kind, tol=tol, k_max=k_max, counter=counter)
    return prop.step(state, source)

# }}}


def discrete_energy(op: Operator1D, state: WaveState) -> float:
    """``||u'||^2 + <u, L u>``, conserved by the source-free exact flow."""
    return float(state.ut @ state.ut + state.u @ op.apply(state.u))
