"""Glued approximate solutions: exactness, FD cross-checks, norms, decay."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from biharmlab.cutoff import CUTOFF_DERIV_BOUNDS, radial_cutoff, smoothstep4
from biharmlab.gluing import (CutoffSpec, GlueConfig, approx_solution, decay_fit,
                              error_field, remainder_Q, weighted_norm)


def _points_config(params, profile, eps, centers=None, R=1.0, gamma_w=-3.5, L=4.0):
    centers = np.zeros((1, params.N)) if centers is None else np.asarray(centers)
    eps = np.atleast_1d(eps)
    return GlueConfig(mode="points", params=params, profile=profile,
                      cutoff=CutoffSpec(R), gamma_w=gamma_w, centers=centers,
                      eps=eps, box_halfwidth=L)


# ---------------------------------------------------------------------------
# cutoff
# ---------------------------------------------------------------------------

def test_cutoff_c4_matching():
    # value and four derivatives continuous at the seams r = 1, 2
    for r0 in (1.0, 2.0):
        for k in range(5):
            lo = radial_cutoff(np.array([r0 - 1e-12]), k)[0]
            hi = radial_cutoff(np.array([r0 + 1e-12]), k)[0]
            assert lo == pytest.approx(hi, abs=1e-7)
    r = np.linspace(-0.5, 3.0, 2001)
    chi = radial_cutoff(r)
    assert np.all((0.0 <= chi) & (chi <= 1.0))
    assert np.all(chi[r <= 1.0] == 1.0)
    assert np.all(chi[r >= 2.0] == 0.0)
    assert len(CUTOFF_DERIV_BOUNDS) == 5 and all(np.isfinite(b) for b in CUTOFF_DERIV_BOUNDS)


def test_smoothstep_derivative_consistency():
    x = np.linspace(0.05, 0.95, 400)
    h = 1e-5
    for k in range(4):
        fd = (smoothstep4(x + h, k) - smoothstep4(x - h, k)) / (2.0 * h)
        assert_allclose(fd, smoothstep4(x, k + 1), rtol=1e-7, atol=1e-4)


# ---------------------------------------------------------------------------
# approximate solution and error field
# ---------------------------------------------------------------------------

def test_exact_inside_and_zero_outside(params10, profile10, rng):
    cfg = _points_config(params10, profile10, 0.25)
    ef = error_field(cfg)
    ap = approx_solution(cfg)
    dirs = rng.standard_normal((40, 10))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    inside = dirs * rng.uniform(0.05, 0.99, (40, 1))
    vals = ap.value(inside)
    f_in = ef.value(inside)
    # exact solution region: residual at profile-residual level
    assert np.max(np.abs(f_in) / (1.0 + vals**2)) <= 1e-7
    outside = dirs * rng.uniform(2.01, 3.5, (40, 1))
    assert np.all(ap.value(outside) == 0.0)
    assert np.all(ef.value(outside) == 0.0)
    annulus = dirs * rng.uniform(1.05, 1.95, (40, 1))
    assert np.max(np.abs(ef.value(annulus))) > 0.0


def test_fd_cross_check(params10, profile10, rng):
    """Analytic Delta and Delta^2 match centered 4th-order differences."""
    eps = 0.25
    cfg = _points_config(params10, profile10, eps)
    ap = approx_solution(cfg)
    pts = rng.standard_normal((100, 10))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= rng.uniform(0.35, 1.9, (100, 1))
    val, grad, lap, glap, bilap = ap.fields(pts)
    h = 3e-4  # tuned for eps = 0.25
    lap_fd = np.zeros(len(pts))
    for k in range(10):
        e = np.zeros(10)
        e[k] = h
        lap_fd += (-ap.value(pts + 2 * e) + 16 * ap.value(pts + e) - 30 * val
                   + 16 * ap.value(pts - e) - ap.value(pts - 2 * e)) / (12 * h * h)
    assert np.max(np.abs(lap_fd - lap) / (1.0 + np.abs(lap))) <= 1e-5
    bilap_fd = np.zeros(len(pts))
    for k in range(10):
        e = np.zeros(10)
        e[k] = h
        lp = [ap.fields(pts + m * e)[2] for m in (-2, -1, 1, 2)]
        bilap_fd += (-lp[3] + 16 * lp[2] - 30 * lap + 16 * lp[1] - lp[0]) / (12 * h * h)
    assert np.max(np.abs(bilap_fd - bilap) / (1.0 + np.abs(bilap))) <= 1e-5
    # gradient directions
    gdot = np.einsum("ij,ij->i", grad, pts / np.linalg.norm(pts, axis=1, keepdims=True))
    vfd = (ap.value(pts * (1 + 1e-6)) - ap.value(pts * (1 - 1e-6)))
    rfd = vfd / (2e-6 * np.linalg.norm(pts, axis=1))
    assert np.max(np.abs(gdot - rfd) / (1.0 + np.abs(gdot))) <= 1e-4


def test_fd_cross_check_flat(params10, profile10, rng):
    cfg = GlueConfig(mode="flat_edge", params=params10, profile=profile10,
                     cutoff=CutoffSpec(1.0), gamma_w=-3.2, eps=[0.25], edge_k=2,
                     box_halfwidth=3.0)
    ap = approx_solution(cfg)
    x = rng.standard_normal((60, 10))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= rng.uniform(0.4, 1.8, (60, 1))
    y = rng.uniform(-2.2, 2.2, (60, 2))
    pts = np.concatenate([x, y], axis=1)
    val, grad, lap, glap, bilap = ap.fields(pts)
    h = 3e-4
    lap_fd = np.zeros(len(pts))
    for k in range(12):
        e = np.zeros(12)
        e[k] = h
        lap_fd += (-ap.value(pts + 2 * e) + 16 * ap.value(pts + e) - 30 * val
                   + 16 * ap.value(pts - e) - ap.value(pts - 2 * e)) / (12 * h * h)
    assert np.max(np.abs(lap_fd - lap) / (1.0 + np.abs(lap))) <= 1e-5
    bilap_fd = np.zeros(len(pts))
    for k in range(12):
        e = np.zeros(12)
        e[k] = h
        lp = [ap.fields(pts + m * e)[2] for m in (-2, -1, 1, 2)]
        bilap_fd += (-lp[3] + 16 * lp[2] - 30 * lap + 16 * lp[1] - lp[0]) / (12 * h * h)
    assert np.max(np.abs(bilap_fd - bilap) / (1.0 + np.abs(bilap))) <= 1e-5


def test_flat_error_three_terms(params10, profile10, rng):
    """f reduces to u^p(chi - chi^p) + 2 lap_x u lap_y chi + u bilap_y chi."""
    from biharmlab.radial import bilap_radial, lap_radial

    eps = 0.25
    cfg = GlueConfig(mode="flat_edge", params=params10, profile=profile10,
                     cutoff=CutoffSpec(1.0), gamma_w=-3.2, eps=[eps], edge_k=2,
                     box_halfwidth=3.0)
    ef = error_field(cfg)
    x = rng.standard_normal((50, 10))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= rng.uniform(0.3, 2.0, (50, 1))
    y = rng.uniform(-2.1, 2.1, (50, 2))
    pts = np.concatenate([x, y], axis=1)
    rx = np.linalg.norm(x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    a = params10.singular_rate
    v = profile10.r_view(rx / eps)
    u = eps**-a * v.u
    lap_u = lap_radial(10, rx, eps ** (-a - 1) * v.du, eps ** (-a - 2) * v.d2u)
    cut = cfg.cutoff
    chi = cut.chi(ry, 0)
    lap_chi = lap_radial(2, ry, cut.chi(ry, 1), cut.chi(ry, 2))
    bilap_chi = bilap_radial(2, ry, cut.chi(ry, 1), cut.chi(ry, 2),
                             cut.chi(ry, 3), cut.chi(ry, 4))
    expect = u**2 * (chi - chi**2) + 2.0 * lap_u * lap_chi + u * bilap_chi
    got = ef.value(pts)
    assert_allclose(got, expect, rtol=1e-9, atol=1e-9)
    # in the chi = 1 slab the x-directions cancel exactly
    pts_in = pts.copy()
    pts_in[:, 10:] = 0.3 * pts_in[:, 10:] / ry[:, None]
    assert np.max(np.abs(ef.value(pts_in)) / (1.0 + ef._approx.value(pts_in) ** 2)) <= 1e-7


def test_superposition_two_points(params10, profile10):
    centers = np.zeros((2, 10))
    centers[0, 0] = -2.0
    centers[1, 0] = 2.01
    cfg2 = _points_config(params10, profile10, [0.25, 0.125], centers=centers, L=4.5)
    cfg_a = _points_config(params10, profile10, 0.25, centers=centers[:1], L=4.5)
    cfg_b = _points_config(params10, profile10, 0.125, centers=centers[1:], L=4.5)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-4.4, 4.4, (300, 10))
    f2 = error_field(cfg2).value(pts)
    fa = error_field(cfg_a).value(pts)
    fb = error_field(cfg_b).value(pts)
    # disjoint supports: the cross-term in ubar^p vanishes identically
    assert_allclose(f2, fa + fb, rtol=1e-12, atol=1e-12)


def test_scaling_covariance(params10, profile10, rng):
    """f for (eps, R) equals eps^{-4p/(p-1)} (f for (1, R/eps))(./eps), to 1e-12."""
    eps, R = 0.25, 1.0
    cfg = _points_config(params10, profile10, eps, R=R)
    cfg_ref = _points_config(params10, profile10, 1.0, R=R / eps, L=2.0 * R / eps + 1.0)
    pts = rng.standard_normal((80, 10))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= rng.uniform(0.2, 2.2 * R, (80, 1))
    lhs = error_field(cfg).value(pts)
    rhs = eps ** (-4.0 * 2.0 / (2.0 - 1.0)) * error_field(cfg_ref).value(pts / eps)
    assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.max(np.abs(lhs)))


def test_config_validation(params10, profile10):
    with pytest.raises(ValueError, match="overlap"):
        centers = np.zeros((2, 10))
        centers[1, 0] = 3.0
        _points_config(params10, profile10, [0.1, 0.1], centers=centers, L=8.0)
    with pytest.raises(ValueError, match="box"):
        _points_config(params10, profile10, 0.1, L=1.5)
    with pytest.raises(ValueError, match="gamma_w"):
        _points_config(params10, profile10, 0.1, gamma_w=0.5)
    with pytest.raises(ValueError, match="dilation"):
        _points_config(params10, profile10, 1.5)
    with pytest.raises(ValueError, match="gamma_w"):
        GlueConfig(mode="flat_edge", params=params10, profile=profile10,
                   cutoff=CutoffSpec(1.0), gamma_w=-5.0, eps=[0.25], edge_k=2)


def test_weighted_norm_pure_power(params10, profile10):
    """Homogeneity: s^{-gamma} |w|_{0,0,s} constant across shells for w = |x|^gamma."""
    cfg = _points_config(params10, profile10, 0.25)
    gamma = -3.5

    def w(pts):
        return np.linalg.norm(pts, axis=1) ** gamma

    rep = weighted_norm(w, cfg, gamma, n_shells=8, seed=3)
    weighted = np.array([row[3] for row in rep.shells])
    assert float(np.max(weighted) / np.min(weighted)) <= 1.0 + 1e-10
    # sup over a larger shell family never decreases the total
    rep_more = weighted_norm(w, cfg, gamma, n_shells=12, seed=3)
    assert rep_more.total >= rep.total - 1e-12


def test_weighted_norm_holder_quotient(params10, profile10):
    cfg = _points_config(params10, profile10, 0.25)
    ef = error_field(cfg)
    rep = weighted_norm(ef.value, cfg, -7.5, alpha_h=0.4, seed=1)
    assert rep.total > rep.outer >= 0.0
    assert all(row[2] >= 0.0 for row in rep.shells)
    assert rep.sample_counts["n_shells"] == 10


def test_decay_fit_points(params10, profile10):
    eps_list = [2.0**-k for k in range(3, 8)]
    fit = decay_fit(params10, profile10, eps_list, -3.5, mode="points", seed=0)
    assert fit.nominal == pytest.approx(2.0)
    assert 1.7 <= fit.slope <= 2.3
    assert not fit.extrapolated_target


def test_decay_fit_flat(params10, profile10):
    eps_list = [2.0**-k for k in range(3, 8)]
    fit = decay_fit(params10, profile10, eps_list, -3.2, mode="flat_edge",
                    edge_k=2, seed=0)
    assert fit.nominal == pytest.approx(0.2, abs=1e-12)
    assert fit.extrapolated_target
    assert fit.slope >= 0.1


def test_decay_fit_reproducible_across_ranges(params10, profile10):
    lo = decay_fit(params10, profile10, [2.0**-k for k in range(3, 6)], -3.5,
                   mode="points", seed=0)
    hi = decay_fit(params10, profile10, [2.0**-k for k in range(5, 8)], -3.5,
                   mode="points", seed=0)
    assert abs(lo.slope - hi.slope) <= 0.15


def test_decay_fit_needs_multiple_eps(params10, profile10):
    with pytest.raises(ValueError):
        decay_fit(params10, profile10, [0.125], -3.5)


def test_remainder_q():
    ub = np.array([2.0, 1.0, 0.5])
    assert_allclose(remainder_Q(ub, np.zeros(3), 2.0), 0.0, atol=0.0)
    v = np.array([0.3, -0.05, 0.1])
    assert_allclose(remainder_Q(ub, v, 2.0), -(v**2), rtol=1e-12, atol=1e-16)
    with pytest.raises(ValueError):
        remainder_Q(np.array([1.0]), np.array([-2.0]), 2.0)
    out = remainder_Q(np.array([1.0]), np.array([-2.0]), 2.0, absolute=True)
    assert np.isfinite(out[0])


def test_export_interfaces(params10, profile10, tmp_path):
    from biharmlab.gluing import export_error_samples, export_norm_report

    cfg = _points_config(params10, profile10, 0.25)
    ef = error_field(cfg)
    rep = weighted_norm(ef.value, cfg, -7.5, n_shells=4, seed=2)
    p1 = tmp_path / "samples.txt"
    export_error_samples(p1, ef._approx, rep)
    lines = p1.read_text().splitlines()
    data_lines = [ln for ln in lines if not ln.startswith("#")]
    assert len(data_lines) == sum(len(v) for _, _, v in rep.samples)
    assert len(data_lines[0].split()) == 10 + 3  # coordinates, ubar, f, shell
    p2 = tmp_path / "norm.txt"
    export_norm_report(p2, rep)
    text = p2.read_text()
    assert f"total = {rep.total!r}" in text
    assert "shell[" in text and "outer = " in text


def test_remainder_taylor_bound(rng):
    """|Q(v)| <= p(p-1) 1.1^{|p-2|} ubar^{p-2} v^2 for |v| <= ubar/10."""
    for p in (1.6, 2.0, 2.2):
        ub = rng.uniform(0.2, 3.0, 500)
        v = ub * rng.uniform(-0.1, 0.1, 500)
        Q = remainder_Q(ub, v, p)
        bound = p * (p - 1.0) * 1.1 ** abs(p - 2.0) * ub ** (p - 2.0) * v**2
        assert np.all(np.abs(Q) <= bound + 1e-14)
