import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from singsurf.kss import Grid1D, WaveState
from singsurf.lwe_solver import (FIT_WINDOW, REFERENCE_GRID, CoordinateMap, LweBreakdown,
                                 LweConfig, LweLift, ReducedOperator, SigmaSchedule,
                                 assemble_source, build_map, fit_front, lagrange_resample,
                                 lwe_default_schedule, measure_front, measure_front_slope,
                                 oscillation_index, solve_lwe, spectral_utt, theory_front_slope,
                                 threshold_front)
from singsurf.specfun import dst_forward
from singsurf.surface import LweParams

ALPHA = 0.156451
alphas = st.floats(0.01, 3.0).flatmap(lambda a: st.sampled_from([a, -a]))


@pytest.fixture(scope="module")
def desk_runs():
    out = {}
    for eps in (0.35, 0.4):
        cfg = LweConfig(params=LweParams(1.4, eps), n=8192, t_end=0.6,
                        snapshots=(0.0, 0.3, 0.6))
        out[eps] = solve_lwe(cfg)
    return out


# {{{ coordinate map

def test_map_constant_against_quadrature():
    m = CoordinateMap(ALPHA)
    assert m.K == pytest.approx(-0.0782255, abs=1e-15)
    inv_c = integrate.quad(lambda x: math.exp(-m.K * x), 0, 1, epsabs=1e-15)[0]
    assert m.C == pytest.approx(1 / inv_c, rel=1e-13)
    assert m.C == pytest.approx(0.9614, abs=1e-4)


@given(alphas, st.floats(0.0, 1.0))
def test_map_round_trip(alpha, x):
    m = CoordinateMap(alpha)
    assert float(m.phi_inverse(m.phi(x))) == pytest.approx(x, abs=1e-12)


@given(alphas)
def test_map_endpoints_and_monotone(alpha):
    m = CoordinateMap(alpha)
    assert float(m.phi(0.0)) == 0.0
    assert float(m.phi(1.0)) == pytest.approx(1.0, abs=1e-15)
    X = np.linspace(0, 1, 257)
    assert np.all(np.diff(m.phi(X)) > 0)
    assert np.all(m.dphi(X) > 0)


@given(alphas, st.floats(0.0, 1.0))
def test_map_derivative(alpha, x):
    m = CoordinateMap(alpha)
    h = 1e-6
    fd = (m.phi(x + h) - m.phi(x - h)) / (2 * h)
    assert float(m.dphi(x)) == pytest.approx(float(fd), rel=1e-8)


@pytest.mark.parametrize("alpha", [1e-9, 1e-12, 0.0])
def test_map_small_k_path(alpha):
    m = CoordinateMap(alpha)
    assert m.small
    assert m.C == pytest.approx(1.0, abs=1e-9)
    X = np.linspace(0, 1, 11)
    assert_allclose(m.phi(X), X, atol=1e-9)
    assert_allclose(m.phi_inverse(m.phi(X)), X, atol=1e-12)


def test_map_series_meets_closed_form():
    k = 1e-7
    near, far = CoordinateMap(-2 * k * 0.999), CoordinateMap(-2 * k * 1.001)
    assert near.small and not far.small
    assert near.C == pytest.approx(far.C, rel=1e-9)
    X = np.linspace(0, 1, 11)
    assert_allclose(near.phi(X), far.phi(X), atol=1e-9)

# }}}


# {{{ reduced operator

@given(alphas)
def test_a0_matches_closed_form(alpha):
    m, red = build_map(LweParams(1.4, 0.35, alpha))
    Y = np.linspace(0, 1, 101)
    X = m.phi_inverse(Y)
    assert_allclose(red.a0(Y), 3 * alpha**2 / 16 * np.exp(2 * m.K * X), rtol=1e-12)
    assert red.a2 == m.C**2


@given(alphas)
def test_a1_derivative_is_analytic(alpha):
    red = ReducedOperator(CoordinateMap(alpha))
    Y = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    fd = (red.a1_tilde(Y + h) - red.a1_tilde(Y - h)) / (2 * h)
    assert_allclose(red.a1_tilde_prime(Y), fd, rtol=1e-8)


@pytest.mark.parametrize("alpha", [ALPHA, -0.8, 2.0])
def test_psi_against_quadrature(alpha):
    m = CoordinateMap(alpha)
    red = ReducedOperator(m)
    for y in np.linspace(0, 1, 9):
        q = integrate.quad(lambda s: red.a1_tilde(s) / (2 * red.a2), 0, y,
                           epsabs=1e-14, epsrel=1e-13)[0]
        assert float(m.psi(y)) == pytest.approx(math.exp(q), rel=1e-10)


def test_homogeneous_limit():
    red = ReducedOperator(CoordinateMap(1e-12))
    Y = np.linspace(0, 1, 11)
    assert np.abs(red.a1_tilde(Y)).max() < 1e-11
    assert np.abs(red.a0(Y)).max() < 1e-22


def test_build_map_needs_alpha():
    with pytest.raises(ValueError):
        build_map(LweParams(1.4, 0.35))

# }}}


# {{{ lift and source

@given(st.floats(0.0, 2.0), alphas)
def test_lift_source_vanishes_at_boundary(T, alpha):
    _, red = build_map(LweParams(1.4, 0.35, alpha))
    lift = LweLift(LweParams(1.4, 0.35, alpha), red)
    s = lift.sample(np.array([0.0, 0.25, 0.5, 0.75]), T)
    assert s.F[0] == pytest.approx(math.sin(math.pi * T), abs=1e-15)
    assert abs(s.G[0]) <= 1e-12
    assert s.F[-1] == 0.0 and s.G[-1] == 0.0
    f0, f2 = lift.boundary(T)
    assert lift.shapes.junction_residual(f0[0], f2[0]) <= 1e-12


def test_lift_rejects_cutoff():
    _, red = build_map(LweParams(1.4, 0.35, ALPHA))
    with pytest.raises(ValueError):
        LweLift(LweParams(1.4, 0.35, ALPHA), red, cutoff=1.0)


def _state(n, seed=0):
    rng = np.random.default_rng(seed)
    return WaveState(rng.normal(size=n), rng.normal(size=n), 0.3), rng.normal(size=n)


def test_source_without_nonlinearity():
    p = LweParams(1.4, 1e-300, ALPHA)
    m, red = build_map(p)
    lift = LweLift(p, red)
    Y = Grid1D(64, 1.0).points
    s = lift.sample(Y, 0.3)
    state, utt = _state(64)
    b = assemble_source(0.0, m.psi(Y), state, s, utt)
    assert np.array_equal(b, s.G)
    linear = -s.F_tt + red.a2 * s.F_xx - red.a0(Y) * s.F
    assert_allclose(s.G, linear, rtol=1e-14, atol=1e-14)


def test_source_outside_lift_support():
    p = LweParams(1.4, 0.35, ALPHA)
    m, red = build_map(p)
    lift = LweLift(p, red)
    Y = Grid1D(64, 1.0).points
    s = lift.sample(Y, 0.3)
    state, utt = _state(64, 1)
    psi = m.psi(Y)
    b = assemble_source(p.epsilon * p.beta_hat, psi, state, s, utt)
    far = Y >= 0.5
    expect = 2 * p.epsilon * p.beta_hat * psi * (state.u * utt + state.ut**2)
    assert_allclose(b[far], expect[far], rtol=1e-14)


def _manufactured_q():
    """``Q = d_T(U U_T + U_T F + U F_T)`` for ``U = sin(pi Y) sin(pi T)`` and a generic lift ``F``."""
    y, t = sp.symbols("y t")
    F = sp.Function("F")(y, t)
    U = sp.sin(sp.pi * y) * sp.sin(sp.pi * t)
    Ut = sp.diff(U, t)
    Q = sp.diff(U * Ut + Ut * F + U * sp.diff(F, t), t)
    f, ft, ftt = sp.symbols("f f_t f_tt")
    Q = Q.subs(sp.diff(F, t, 2), ftt).subs(sp.diff(F, t), ft).subs(F, f)
    lam = lambda e, *a: sp.lambdify((y, t) + a, e, "numpy")  # noqa: E731
    return lam(U), lam(Ut), lam(Q, f, ft, ftt)


@pytest.mark.parametrize("T", [0.3, 0.7])
def test_source_manufactured_first_order(T):
    u_fn, ut_fn, q_fn = _manufactured_q()
    p = LweParams(1.4, 0.35, ALPHA)
    _, red = build_map(p)
    lift = LweLift(p, red)
    Y = Grid1D(255, 1.0).points
    s = lift.sample(Y, T)
    exact = q_fn(Y, T, s.F, s.F_t, s.F_tt)
    eb = p.epsilon * p.beta_hat
    errs = []
    for dt in (1e-2, 1e-3):
        utt = spectral_utt(dst_forward(ut_fn(Y, T)), dst_forward(ut_fn(Y, T - dt)), dt)
        b = assemble_source(eb, 1.0, WaveState(u_fn(Y, T), ut_fn(Y, T), T), s, utt)
        errs.append(np.abs((b - s.G) / (2 * eb) - exact).max())
    assert errs[1] < 1e-2
    assert 0.9 <= math.log10(errs[0] / errs[1]) <= 1.1

# }}}


# {{{ driver

def test_config_defaults():
    cfg = LweConfig(n=64, snapshots=())
    assert cfg.params.alpha == pytest.approx(ALPHA, abs=1e-6)
    assert cfg.t_end == pytest.approx(0.98617, abs=5e-5)
    assert cfg.time_step == pytest.approx(10 / 65)
    assert cfg.schedule.power_ut(cfg.t_end) == pytest.approx(1536 * 64 / REFERENCE_GRID)
    assert cfg.schedule.power_utt(cfg.t_end) == pytest.approx(16384)


@pytest.mark.parametrize("kw", [dict(backend="rk4"), dict(n=4), dict(cfl=0.0),
                                dict(t_end=-1.0), dict(t_end=0.5, snapshots=(0.6,))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        LweConfig(**kw)


def test_schedules():
    s = SigmaSchedule.increasing(2.0, 100.0, 400.0)
    assert s.power_ut(0.0) == 0.0 and s.power_utt(0.0) == 0.0
    assert s.power_ut(1.0) == 50.0 and s.power_utt(1.0) == 100.0
    assert SigmaSchedule.utt_only(4096).power_utt(0.3) == 4096
    assert SigmaSchedule.none().power_ut(1.0) == 0.0
    assert lwe_default_schedule(1.0, REFERENCE_GRID).power_ut(1.0) == 1536
    with pytest.raises(ValueError):
        SigmaSchedule.increasing(0.0)


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.floats(0.0, 1.0))
def test_resample_exact_for_cubics(coef, y):
    nodes = np.sort(np.concatenate([[0.0, 1.0], np.linspace(0.03, 0.97, 14) ** 1.3]))
    poly = np.polynomial.Polynomial(coef)
    out = lagrange_resample(nodes, poly(nodes), np.array([y]))
    assert out[0] == pytest.approx(poly(y), abs=1e-10)


def test_resample_needs_four_nodes():
    with pytest.raises(ValueError):
        lagrange_resample([0, 1, 2], [0, 1, 2], [0.5])


def test_boundary_and_rest(desk_runs):
    for res in desk_runs.values():
        assert np.all(res.at(0.0).P == 0.0)
        for s in res.snapshots:
            assert s.P[0] == pytest.approx(math.sin(math.pi * s.T), abs=1e-12)
            assert s.P[-1] == 0.0
            assert len(s.X) == 8194


@pytest.mark.parametrize("eps", [0.35, 0.4])
@pytest.mark.parametrize("T", [0.3, 0.6])
def test_slope_behind_front(desk_runs, eps, T):
    s = desk_runs[eps].at(T)
    _, slope = fit_front(s.X, s.P, 1 / 8193)
    jump = theory_front_slope(desk_runs[eps].config.params, T)[1]
    assert slope == pytest.approx(jump, rel=0.10)


@pytest.mark.parametrize("eps", [0.35, 0.4])
@pytest.mark.parametrize("T", [0.3, 0.6])
def test_nothing_ahead_of_front(desk_runs, eps, T):
    p = desk_runs[eps].config.params
    s = desk_runs[eps].at(T)
    ahead = s.X > theory_front_slope(p, T)[0] + 10 / 8193
    assert np.abs(s.P[ahead]).max() <= 1e-3


@pytest.mark.parametrize("eps", [0.35, 0.4])
def test_growth_follows_sign_of_alpha(desk_runs, eps):
    p = desk_runs[eps].config.params
    peak = np.abs(desk_runs[eps].at(0.6).P).max()
    assert (peak > 1.0) == (p.alpha > 0)
    assert (peak < 1.0) == (p.alpha < 0)


@pytest.mark.parametrize("eps", [0.35, 0.4])
@pytest.mark.parametrize("T", [0.3, 0.6])
def test_threshold_front_tracks_theory(desk_runs, eps, T):
    p = desk_runs[eps].config.params
    s = desk_runs[eps].at(T)
    assert abs(threshold_front(s.X, s.P) - theory_front_slope(p, T)[0]) <= 3 / 8193


def test_truncates_after_blow_up():
    cfg = LweConfig(params=LweParams(1.4, 0.35), n=512, t_end=1.3,
                    schedule=SigmaSchedule.none(), snapshots=(0.3, 1.2))
    with np.errstate(all="ignore"):
        res = solve_lwe(cfg)
    assert res.truncated_at is not None and res.truncated_at < 1.2
    assert [s.T for s in res.snapshots] == [0.3]
    assert np.all(np.isfinite(res.at(0.3).P))
    with pytest.raises(KeyError):
        res.at(1.2)


def test_krylov_failure_keeps_snapshots():
    cfg = LweConfig(params=LweParams(1.4, 0.35), n=256, t_end=0.5, backend="lanczos",
                    k_max=2, tol=1e-14, snapshots=(0.0,))
    with pytest.raises(LweBreakdown) as info:
        solve_lwe(cfg)
    assert [s.T for s in info.value.partial.snapshots] == [0.0]
    assert info.value.step >= 0


def test_backends_agree_on_short_run():
    kw = dict(params=LweParams(1.4, 0.35), n=256, cfl=1.0, t_end=0.2, snapshots=(0.2,))
    ref = solve_lwe(LweConfig(**kw)).at(0.2).P
    for backend in ("fourier", "lanczos"):
        other = solve_lwe(LweConfig(backend=backend, **kw)).at(0.2).P
        assert np.abs(other - ref).max() < 1e-3

# }}}


# {{{ measurement

X = np.linspace(0, 1, 4097)
DX = X[1]


def _ramp(s, xf):
    return np.where(X < xf, s * (X - xf), 0.0)


@pytest.mark.parametrize("s", [-3.0, 1.0, 2.5])
def test_slope_of_ramp(s):
    assert measure_front_slope(X, _ramp(s, 0.6), 0.6, DX) == pytest.approx(s, rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_slope_with_noise(seed):
    # on 256 cells the fit's standard error is about 2.4e-3
    x = np.linspace(0, 1, 257)
    rng = np.random.default_rng(seed)
    P = np.where(x < 0.6, x - 0.6, 0.0) + 1e-4 * rng.standard_normal(x.size)
    assert measure_front_slope(x, P, 0.6, x[1]) == pytest.approx(1.0, rel=0.01)


def test_slope_of_constant():
    assert measure_front_slope(X, np.full(X.size, 0.7), 0.5, DX) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("front, window", [(0.0, (2, 12)), (1.0, (2, 12)),
                                           (0.001, (2, 12)), (0.5, (5, 2)),
                                           (0.5, (2.0, 2.5))])
def test_slope_window_errors(front, window):
    with pytest.raises(ValueError):
        measure_front_slope(X, _ramp(1.0, 0.5), front, DX, window)


def test_front_of_ramp():
    P = _ramp(-2.0, 0.61234)
    assert threshold_front(X, P) <= 0.61234
    assert measure_front(X, P, DX) == pytest.approx(0.61234, abs=1e-10)
    front, slope = fit_front(X, P, DX)
    assert front == pytest.approx(0.61234, abs=1e-10)
    assert slope == pytest.approx(-2.0, rel=1e-10)
    assert FIT_WINDOW[0] < FIT_WINDOW[1]


@pytest.mark.parametrize("s", [-4.0, -1.0, 3.0])
def test_threshold_front_lags_a_kink(s):
    # the rule stops where |P| first exceeds 1e-2 max|P|, short of the kink itself
    P = _ramp(s, 0.7)
    lag = 1e-2 * np.abs(P).max() / abs(s)
    assert threshold_front(X, P) == pytest.approx(0.7 - lag, abs=DX)


def test_threshold_front_of_zero_profile():
    assert threshold_front(X, np.zeros(X.size)) == 0.0

@given(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), st.floats(0.1, 0.9))
def test_oscillation_index_of_monotone_profile(s, center):
    assert oscillation_index(X, _ramp(s, 0.95), center) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("waves", [2, 5, 11])
def test_oscillation_index_counts_wiggles(waves):
    # `waves` full periods travel 4 * waves half ranges; sampling clips the peaks slightly
    P = np.sin(2 * np.pi * waves * (X - 0.48) / 0.04)
    assert oscillation_index(X, P, 0.5) == pytest.approx(2 * waves, rel=0.05)


def test_oscillation_index_edge_cases():
    assert oscillation_index(X, np.ones(X.size), 0.5) == 1.0
    with pytest.raises(ValueError):
        oscillation_index(X, X, 0.5, half_width=1e-6)

# }}}
