"""Singular-profile construction: endpoint asymptotics, residuals, identities.

The session profile (beta = 1, window [-16, ~21]) is shared; tests that
need a different frame build cheap shifted copies.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import brentq

from biharmlab.delaunay import (ProfileRangeError, dissipation_check, energy,
                                export_profile, hamiltonian, import_profile,
                                kelvin_transform, monotonicity_report,
                                normalize_small_tail, scale_to_beta,
                                shoot_once, solve_singular)


def test_endpoint_convergence(params10, profile10):
    prof = profile10
    assert abs(prof.ubar(prof.t_hi) - params10.c_p) <= 1e-4 * params10.c_p
    # the left tail is on the unstable manifold, below the contract size
    y0 = prof.ubar_state(prof.t_lo)
    assert np.linalg.norm(y0) <= 1e-4 * params10.c_p


def test_far_field_coefficient(params10, profile10):
    # r^{N-4} u(r) -> beta at the largest represented radius
    t0 = profile10.t_lo
    beta_fit = float(profile10.ubar(t0)) * math.exp(-params10.slow_rate * t0)
    assert abs(beta_fit - 1.0) <= 1e-4


def test_ode_residual(profile10):
    tt = np.linspace(profile10.t_lo + 0.05, profile10.t_hi - 0.05, 6001)
    assert float(np.max(profile10.scaled_residual(tt))) <= 1e-7


def test_positivity_and_sup_bound(params10, profile10):
    tt = np.linspace(profile10.t_lo, profile10.t_hi, 6001)
    ub = profile10.ubar(tt)
    assert np.all(ub > 0.0)
    bound = (params10.p + 1.0) / 2.0 * params10.k_const
    assert float(np.max(ub ** (params10.p - 1.0))) <= bound * (1.0 + 1e-6)


def test_slow_rate_matches_characteristic_root(params10):
    # eigenvalue of the linearization at ubar = 0, cross-checked against the
    # characteristic polynomial root set
    K = profile_coeffs = None
    from biharmlab.core import emden_coeffs

    K = emden_coeffs(params10)
    mu = np.roots([1.0, K.K3, K.K2, K.K1, K.K0]).real
    assert params10.slow_rate == pytest.approx(2.0)
    assert np.min(np.abs(mu - params10.slow_rate)) <= 1e-9
    assert np.min(np.abs(mu - params10.fast_rate)) <= 1e-9


def test_shot_classification(params10):
    from biharmlab.core import emden_coeffs

    K = emden_coeffs(params10)
    h = 1e-6 * params10.c_p
    out_hi, _ = shoot_once(params10, K, h, 0.5 * h)
    out_lo, _ = shoot_once(params10, K, h, -0.5 * h)
    assert {out_hi.classification, out_lo.classification} == {"overshoot", "undershoot"}
    b_max = 2.0 * ((params10.p + 1.0) * params10.k_const / 2.0) ** (1.0 / (params10.p - 1.0))
    over = out_hi if out_hi.classification == "overshoot" else out_lo
    under = out_lo if over is out_hi else out_hi
    assert over.state_end[0] == pytest.approx(b_max, rel=1e-8)
    assert under.state_end[0] == pytest.approx(0.0, abs=1e-6 * params10.c_p)


def test_monotonicity_and_asymptotic_rates(profile10):
    rep = monotonicity_report(profile10)
    assert rep.signs_ok, rep.violations
    assert rep.max_slope_error() <= 0.05
    assert rep.nominal_far == {"u": -6.0, "du": -7.0, "lap": -8.0, "dlap": -9.0}
    assert rep.nominal_near == {"u": -4.0, "du": -5.0, "lap": -6.0, "dlap": -7.0}


def test_r_view_system_consistency(profile10):
    """Radial residual on an annulus via finite differences (non-circular).

    Differentiate Delta u numerically and compare with the state's (Delta u)'
    and with the closed radial equation; this checks the Emden-Fowler to
    r-view transformation independently of the construction of u''''.
    """
    tau = np.linspace(np.log(0.3), np.log(3.0), 4001)
    h = tau[1] - tau[0]
    r = np.exp(tau)
    v = profile10.r_view(r)

    def d_dtau4(f):
        # fourth-order central stencil on the uniform log grid (interior)
        return (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)

    mid = slice(2, -2)
    # differentiate in the log variable: power-law fields stay well-scaled
    dlap_fd = d_dtau4(v.lap) / r[mid]
    assert np.max(np.abs(dlap_fd - v.dlap[mid]) / np.abs(v.dlap[mid])) <= 1e-8
    # second radial derivative of Delta u closes the equation Delta^2 u = u^p;
    # the two linear terms cancel to the size of u^p, so normalize by the
    # largest participating term
    d2lap_fd = d_dtau4(v.dlap) / r[mid]
    lower = (10 - 1.0) / r[mid] * v.dlap[mid]
    resid = d2lap_fd + lower - v.u[mid] ** 2
    scale = np.maximum(np.abs(d2lap_fd), np.maximum(np.abs(lower), v.u[mid] ** 2))
    assert np.max(np.abs(resid) / scale) <= 1e-8


def test_energy_endpoints(params10, profile10):
    K = profile10.coeffs
    cp = params10.c_p
    e_left = float(energy(profile10, profile10.t_lo))
    assert abs(e_left) <= 1e-6 * K.K0 * cp**2
    e_right = float(energy(profile10, profile10.t_hi))
    e_limit = cp ** (params10.p + 1.0) / (params10.p + 1.0) - 0.5 * K.K0 * cp**2
    assert e_right == pytest.approx(e_limit, rel=1e-6)
    with pytest.raises(ProfileRangeError):
        energy(profile10, profile10.t_hi + 1.0)


def test_dissipation_identity(profile10):
    lhs, rhs = dissipation_check(profile10, profile10.t_lo + 0.1, profile10.t_hi - 6.0)
    scale = max(abs(lhs), abs(rhs))
    assert abs(lhs - rhs) <= 1e-6 * scale
    # at a critical point of ubar, E itself satisfies the identity and E <= E(-inf)
    tt = np.linspace(profile10.t_hi - 8.0, profile10.t_hi - 1.0, 2000)
    du = profile10.ubar_state(tt)[1]
    k = int(np.argmax(du[:-1] * du[1:] < 0.0))
    t1 = brentq(lambda t: float(profile10.ubar_state(t)[1]), tt[k], tt[k + 1])
    e1 = float(energy(profile10, t1))
    h1 = float(hamiltonian(profile10, t1))
    assert e1 == pytest.approx(h1, rel=1e-9)
    lhs2, rhs2 = dissipation_check(profile10, profile10.t_lo + 0.1, t1)
    assert lhs2 == pytest.approx(rhs2, rel=1e-6)
    assert e1 - float(energy(profile10, profile10.t_lo + 0.1)) <= 0.0


def test_scale_to_beta_identity_and_shift(params10, profile10):
    same = scale_to_beta(profile10, profile10.beta)
    tt = np.linspace(profile10.t_lo + 0.5, profile10.t_hi - 0.5, 200)
    assert_allclose(same.ubar(tt), profile10.ubar(tt), rtol=0.0, atol=0.0)
    prof3 = scale_to_beta(profile10, 3.0)
    assert prof3.beta == pytest.approx(3.0)
    delta = math.log(3.0) / params10.slow_rate
    t2 = np.linspace(max(profile10.t_lo, prof3.t_lo) + 0.2,
                     min(profile10.t_hi, prof3.t_hi) - 0.2, 300)
    assert_allclose(prof3.ubar(t2), profile10.ubar(t2 + delta), rtol=0.0,
                    atol=1e-12 * params10.c_p)


def test_dilation_acts_on_far_field(params10, profile10):
    # dilation by eps multiplies the far-field coefficient by eps^{N-4-4/(p-1)}
    eps = 0.3
    a = params10.singular_rate
    prof2 = scale_to_beta(profile10, profile10.beta * eps**params10.slow_rate)
    r = np.geomspace(5.0, 50.0, 20)
    u2 = prof2.r_view(r).u
    u1 = profile10.r_view(r / eps).u
    assert_allclose(u2, eps**-a * u1, rtol=1e-12)


def test_translation_equivariance_vs_fresh_solve(params10, profile10):
    fresh = solve_singular(params10, beta=3.0, tol=1e-4)
    shifted = scale_to_beta(profile10, 3.0)
    tt = np.linspace(max(fresh.t_lo, shifted.t_lo) + 0.3,
                     min(fresh.t_hi, shifted.t_hi) - 0.3, 400)
    diff = np.max(np.abs(fresh.ubar(tt) - shifted.ubar(tt))) / params10.c_p
    assert diff <= 1e-6


def test_normalize_small_tail(params10, profile10):
    prof = normalize_small_tail(profile10, 0.01)
    r = np.geomspace(1.0, 1e6, 400)
    vals = r**4 * prof.r_view(r).u ** (params10.p - 1.0)
    assert np.max(vals) <= 0.01 * (1.0 + 1e-9)
    # identity when the bound already holds globally
    big = (params10.p + 1.0) / 2.0 * params10.k_const
    assert normalize_small_tail(profile10, 1.1 * big).t_shift == profile10.t_shift
    # doubling alpha never increases the applied dilation
    s1 = normalize_small_tail(profile10, 0.01).t_shift
    s2 = normalize_small_tail(profile10, 0.02).t_shift
    assert s2 >= s1


def test_kelvin_transform(params10, profile10):
    kv = kelvin_transform(profile10)
    assert kv.value_at_zero == pytest.approx(profile10.beta)
    # utilde at the small end approaches beta (bounded, no singularity)
    lo, hi = kv.rho_range()
    assert kv.value(np.array([lo * 1.5]))[0] == pytest.approx(profile10.beta, rel=1e-4)
    assert kv.tail_exponent_nominal == pytest.approx(-2.0)
    assert kv.tail_slope() == pytest.approx(-2.0, abs=0.01)
    # the tail coefficient is c_p: utilde(rho) rho^{(4+alpha)/(p-1)} -> c_p
    rho_far = np.array([hi / 3.0])
    assert kv.value(rho_far)[0] * rho_far[0] ** 2 == pytest.approx(params10.c_p, rel=1e-6)
    assert kv.weak_residual(0.5, 4.0) <= 1e-4


def test_export_import_roundtrip(profile10, tmp_path):
    path = tmp_path / "profile.txt"
    export_profile(profile10, path)
    prof2 = import_profile(path)
    path2 = tmp_path / "profile2.txt"
    export_profile(prof2, path2)
    assert path.read_bytes() == path2.read_bytes()
    tt = np.linspace(profile10.t_lo + 0.2, profile10.t_hi - 0.2, 300)
    assert_allclose(prof2.ubar(tt), profile10.ubar(tt), atol=1e-9 * 192.0)
    assert prof2.beta == profile10.beta
    assert prof2.params.N == 10


def test_solve_rejects_bad_arguments(params10):
    with pytest.raises(ValueError):
        solve_singular(params10, beta=-1.0)
    with pytest.raises(ValueError):
        solve_singular(params10, beta=1.0, tol=1e-7)


def test_range_errors(profile10):
    with pytest.raises(ProfileRangeError):
        profile10.r_view(np.array([1e12]))
    with pytest.raises(ProfileRangeError):
        profile10.ensure_covers(1e-12, 1.0)
