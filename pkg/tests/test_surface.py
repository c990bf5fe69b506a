import csv
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from singsurf.surface import (BreakdownError, CriticalEpsilonError, IsothermalShockParams,
                              LweParams, jump_identities, jump_report, lwe_critical,
                              lwe_front, lwe_front_inverse, lwe_jumps, lwe_limit_alpha0,
                              lwe_times, shock_amplitude, shock_front)

SHOCK = IsothermalShockParams()
gammas = st.floats(1.01, 5.0 / 3.0)
epsilons = st.floats(0.02, 0.98)


def _bullet(gamma, eps):
    p = LweParams(gamma, eps)
    assume(abs(eps - p.epsilon_bullet) > 1e-3)
    return p.with_bullet_alpha()


# {{{ isothermal shock

def test_critical_damping_of_standard_atmosphere():
    assert SHOCK.mu_c == pytest.approx(0.0395, abs=5e-5)
    assert SHOCK.mu_hat == pytest.approx(2 * SHOCK.mu_c, rel=1e-15)


@given(st.floats(1.0, 1e4), gammas, st.floats(0.1, 100.0))
def test_scale_height_times_critical_damping_is_c0(c0, gamma, g):
    p = IsothermalShockParams(c0=c0, gamma=gamma, g=g)
    assert p.mu_c * p.H == pytest.approx(c0, rel=1e-14)


def test_shock_amplitude_examples():
    assert shock_amplitude(SHOCK, 0.0) == SHOCK.W0
    crit = SHOCK.with_(mu_hat=SHOCK.mu_c, W0=2.5)
    assert shock_amplitude(crit, 37.0) == pytest.approx(2.5, rel=1e-15)
    # mu_hat - mu_c = mu_c, so the exponent at t = 10 is 5 mu_c
    assert shock_amplitude(SHOCK, 10.0) == pytest.approx(math.exp(-5 * SHOCK.mu_c), rel=1e-14)
    assert 5 * SHOCK.mu_c == pytest.approx(0.1977, abs=1e-4)


def test_shock_amplitude_independent_of_omega():
    a = shock_amplitude(SHOCK.with_(omega=1.0), 3.0)
    b = shock_amplitude(SHOCK.with_(omega=50.0), 3.0)
    assert a == b


@pytest.mark.parametrize("factor, decreasing", [(2.0, True), (1.3, True), (0.7, False),
                                                (1.0, False)])
def test_shock_amplitude_monotone_iff_supercritical(factor, decreasing):
    p = SHOCK.with_(mu_hat=factor * SHOCK.mu_c)
    a = shock_amplitude(p, np.linspace(0, 50, 101))
    assert bool(np.all(np.diff(a) < 0)) is decreasing


def test_shock_front_examples():
    assert shock_front(SHOCK, 0.0) == 0.0
    assert shock_front(SHOCK, 1.0 / SHOCK.mu_c) == pytest.approx(SHOCK.H, rel=1e-14)
    assert shock_front(SHOCK, 10.0) == pytest.approx(3472.6, rel=1e-14)


@pytest.mark.parametrize("kw", [dict(c0=-1.0), dict(gamma=1.0), dict(gamma=1.7),
                                dict(omega=0.0), dict(W0=0.0), dict(g=-1.0),
                                dict(mu_hat=-0.1)])
def test_shock_params_validation(kw):
    with pytest.raises(ValueError):
        IsothermalShockParams(**kw)

# }}}


# {{{ critical parameters and times

@pytest.mark.parametrize("eps, alpha, t_f", [(0.35, 0.156451, 1.04015),
                                             (0.4, -0.200618, 0.951481)])
def test_published_critical_values(eps, alpha, t_f):
    p = LweParams(1.40, eps)
    a = lwe_critical(p).alpha_bullet
    assert a == pytest.approx(alpha, abs=1e-5)
    tm = lwe_times(p.with_alpha(a))
    assert tm.t_f == pytest.approx(t_f, abs=1e-4)
    assert tm.t1 == pytest.approx(t_f, abs=1e-4)


def test_beta_hat_range():
    for gamma in np.linspace(1.0001, 5 / 3, 50):
        assert 0.8 <= LweParams(gamma, 0.3).beta_hat < 1.0


def test_critical_epsilon_rejected():
    p = LweParams(1.4, 0.3)
    with pytest.raises(CriticalEpsilonError):
        lwe_critical(LweParams(1.4, p.epsilon_bullet))


@given(gammas, epsilons)
def test_bullet_alpha_sign_and_equal_times(gamma, eps):
    p = _bullet(gamma, eps)
    assert math.copysign(1.0, p.alpha) == (1.0 if eps < p.epsilon_bullet else -1.0)
    tm = lwe_times(p)
    assert tm.t_infty is not None
    assert abs(tm.t1 - tm.t_infty) <= 1e-9 * tm.t1
    # the front reaches the far end exactly when the amplitude blows up
    assert lwe_front(p, tm.t_infty)[0] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("eps", [0.38, 0.4, 0.45, 0.5])
def test_no_breakdown_before_blow_up(eps):
    tm = lwe_times(LweParams(1.4, eps).with_bullet_alpha())
    assert tm.t_bd is not None
    assert tm.t_infty < tm.t_bd


def test_alpha_zero_limits():
    p = LweParams(1.4, 0.35, 1e-8)
    tm = lwe_times(p)
    lim = lwe_limit_alpha0(p)
    assert tm.t1 == pytest.approx(1.0, abs=1e-8)
    assert tm.t_infty == pytest.approx(lim["t_infty"], rel=1e-6)
    assert lim["t_infty"] == pytest.approx(1.4 / (0.35 * 1.2 * math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        lwe_times(LweParams(1.4, 0.35, 0.0))


@given(gammas, epsilons, st.floats(-3.0, 3.0))
def test_final_time_is_first_of_arrival_and_blow_up(gamma, eps, alpha):
    assume(abs(alpha) > 1e-6)
    p = LweParams(gamma, eps, alpha)
    assume(abs(eps - p.epsilon_bullet) > 1e-9)
    tm = lwe_times(p)
    cands = [tm.t1] + ([tm.t_infty] if tm.t_infty is not None else [])
    assert tm.t_f == pytest.approx(min(cands), rel=1e-12)
    assert (tm.t_bd is not None) == (alpha < 0)
    # blow-up is real exactly above alpha_crt
    assert (tm.t_infty is not None) == (alpha >= tm.alpha_crt)


def test_blow_up_not_real_below_alpha_crt():
    p = LweParams(1.4, 0.35)
    crt = -4 * p.eps_beta_pi / 3
    assert lwe_times(p.with_alpha(1.01 * crt)).t_infty is None

# }}}


# {{{ front kinematics and jumps

def test_front_examples():
    p = LweParams(1.4, 0.35).with_bullet_alpha()
    assert lwe_front(p, 0.0) == (0.0, 1.0)
    assert lwe_front(p, lwe_times(p).t1)[0] == pytest.approx(1.0, abs=1e-14)
    assert lwe_front(p, 0.98617)[0] == pytest.approx(0.95, abs=1e-4)
    assert lwe_front_inverse(p, 0.95) == pytest.approx(0.98617, abs=5e-5)


@given(st.floats(-1.5, 1.5), st.floats(0.0, 1.0))
def test_front_velocity_is_derivative(alpha, T):
    assume(abs(alpha) > 1e-6)
    p = LweParams(1.4, 0.35, alpha)
    h = 1e-6
    assume(1 + alpha * (T + h) / 2 > 0.1 and 1 + alpha * (T - h) / 2 > 0.1)
    fd = (lwe_front(p, T + h)[0] - lwe_front(p, T - h)[0]) / (2 * h)
    assert fd == pytest.approx(lwe_front(p, T)[1], rel=1e-7)
    assert lwe_front_inverse(p, lwe_front(p, T)[0]) == pytest.approx(T, abs=1e-12)


def test_front_breakdown_error():
    p = LweParams(1.4, 0.4, -0.5)
    with pytest.raises(BreakdownError):
        lwe_front(p, 4.0)
    with pytest.raises(BreakdownError):
        lwe_jumps(p, 4.5)


def test_jumps_at_start():
    j = lwe_jumps(LweParams(1.4, 0.35, 0.3), 0.0)
    assert j.jump_pt == pytest.approx(math.pi, rel=1e-15)
    assert j.jump_px == pytest.approx(-math.pi, rel=1e-15)


def test_jumps_diverge_at_blow_up():
    p = LweParams(1.4, 0.35).with_bullet_alpha()
    t_inf = lwe_times(p).t_infty
    vals = [lwe_jumps(p, t_inf * (1 - d)).jump_pt for d in (1e-2, 1e-4, 1e-6)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 1e5
    past = lwe_jumps(p, t_inf)
    assert past.blown_up and past.jump_pt == math.inf and past.jump_px == -math.inf


def test_jumps_homogeneous_limit():
    p = LweParams(1.4, 0.35, 1e-8)
    expected = math.pi / (1 - p.eps_beta_pi * 0.5)
    assert lwe_jumps(p, 0.5).jump_pt == pytest.approx(expected, rel=1e-6)


@given(gammas, epsilons, st.floats(-2.0, 2.0), st.floats(0.0, 1.0))
def test_maxwell_compatibility(gamma, eps, alpha, frac):
    assume(abs(alpha) > 1e-9)
    p = LweParams(gamma, eps, alpha)
    tm = lwe_times(p)
    T = frac * 0.999 * tm.t_f
    j = lwe_jumps(p, T)
    assume(not j.blown_up)
    v = lwe_front(p, T)[1]
    assert abs(v * j.jump_px + j.jump_pt) <= 1e-12 * abs(j.jump_pt)


def test_jump_report_invariants(tmp_path):
    p = LweParams(1.4, 0.35).with_bullet_alpha()
    times = np.linspace(0.0, 1.0, 41)
    rep = jump_report(p, times)
    assert np.all(np.diff(rep.front_position) > 0)
    assert np.all(rep.front_velocity > 0)
    assert np.allclose(rep.jump_px * rep.front_velocity, -rep.jump_pt, rtol=1e-12)
    assert not rep.blown_up.any()
    path = tmp_path / "report.csv"
    rep.to_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["T", "front_position", "front_velocity", "jump_pt", "jump_px"]
    assert len(rows) == 42
    assert float(rows[-1][3]) == rep.jump_pt[-1]

# }}}


# {{{ jump identities

finite = st.floats(-10.0, 10.0)


@given(st.floats(0.1, 5.0), st.floats(0.1, 3.0), st.floats(0.0, 4.0))
def test_maxwell_identity_for_a_kink(a, V, t):
    # F = a (V t - xi) behind the front, zero ahead: continuous at xi = V t
    rep = jump_identities(f_minus=0.0, f_plus=0.0, ft_minus=a * V, ft_plus=0.0,
                          fxi_minus=-a, fxi_plus=0.0, velocity=V)
    assert rep["maxwell_applicable"]
    assert rep["maxwell"] == pytest.approx(0.0, abs=1e-14)


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.1, 3.0), st.floats(0.0, 3.0))
def test_hadamard_identity_for_a_decaying_shock(k, m, V, t):
    # F = exp(-k t + m (xi - V t)) behind, 0 ahead; on the front [[F]] = exp(-k t)
    amp = math.exp(-k * t)
    rep = jump_identities(f_minus=amp, f_plus=0.0, ft_minus=(-k - m * V) * amp, ft_plus=0.0,
                          fxi_minus=m * amp, fxi_plus=0.0, velocity=V, jump_rate=-k * amp)
    assert not rep["maxwell_applicable"]
    assert rep["hadamard"] == pytest.approx(0.0, abs=1e-12 * max(1.0, amp * (abs(k) + 1)))


@given(finite, finite, finite, finite)
def test_product_identity_random(fm, fp, gm, gp):
    rep = jump_identities(f_minus=fm, f_plus=fp, ft_minus=0.0, ft_plus=0.0, fxi_minus=0.0,
                          fxi_plus=0.0, velocity=1.0, g_minus=gm, g_plus=gp)
    assert abs(rep["product"]) <= 1e-14 * max(1.0, abs(fm * gm), abs(fp * gp))


@given(finite, finite)
def test_product_identity_with_equal_fields(fm, fp):
    rep = jump_identities(f_minus=fm, f_plus=fp, ft_minus=0.0, ft_plus=0.0, fxi_minus=0.0,
                          fxi_plus=0.0, velocity=1.0, g_minus=fm, g_plus=fp)
    jf = fm - fp
    # [[F^2]] = 2 F+ [[F]] + [[F]]^2
    assert fm * fm - fp * fp == pytest.approx(2 * fp * jf + jf * jf, abs=1e-12)
    assert abs(rep["product"]) <= 1e-14 * max(1.0, fm * fm, fp * fp)


def test_continuous_field_has_zero_maxwell_residual():
    rep = jump_identities(f_minus=0.3, f_plus=0.3, ft_minus=2.0, ft_plus=1.0, fxi_minus=-1.0,
                          fxi_plus=0.0, velocity=1.0)
    assert rep["maxwell"] == 0.0


def test_missing_one_sided_data():
    with pytest.raises(ValueError, match="missing"):
        jump_identities(f_minus=1.0, f_plus=None, ft_minus=0.0, ft_plus=0.0, fxi_minus=0.0,
                        fxi_plus=0.0, velocity=1.0)
    with pytest.raises(ValueError):
        jump_identities(f_minus=1.0, f_plus=0.0, ft_minus=0.0, ft_plus=0.0, fxi_minus=0.0,
                        fxi_plus=0.0, velocity=1.0, g_minus=1.0)

# }}}
