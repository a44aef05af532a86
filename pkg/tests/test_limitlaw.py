"""Semistable limit machinery: weights, characteristic functions, inversion,
series sampling, centering constants.

The heavy cross-validation against simulation lives in the acceptance suite;
here each piece is pinned against an independent small computation.
"""

import math

import numpy as np
import pytest
from scipy.stats import norm

from petersburg.limitlaw import (
    InversionError,
    a_const,
    cdf_from_cf,
    centering,
    centering_closed,
    cf_Wgamma,
    cf_Wjgamma,
    chernoff_bound,
    chernoff_h,
    curve_moments,
    gmix_cdf,
    gstar_cdf,
    invert_cf_curve,
    log_cf_f,
    p_weight,
    r_weight,
    sample_Y,
    series_center,
    u_gamma_const,
    wgamma_cdf_curve,
    wjg_cdf_curve,
    xi_and_f,
)
from petersburg.stpdist import gamma_n


def test_p_weight_depends_only_on_rate():
    # the level weight is a function of gamma * 2^-j alone
    for j in (-2, 0, 3, 10):
        assert p_weight(j, 0.5) == pytest.approx(p_weight(j + 1, 1.0), rel=1e-15)


def test_p_weight_normalizes():
    for g in (0.5, 0.6, 0.75, 1.0):
        total = sum(p_weight(j, g) for j in range(-8, 61))
        assert total == pytest.approx(1.0, abs=1e-13)


def test_p_weight_domain():
    with pytest.raises(ValueError):
        p_weight(0, 0.25)
    with pytest.raises(ValueError):
        p_weight(0, 1.5)


def test_r_weight_is_conditioned_poisson():
    lam = 0.75 * 2.0**2  # j = -2
    z = math.expm1(lam)
    for m in range(1, 8):
        want = lam**m / math.factorial(m) / z
        assert r_weight(-2, 0.75, m) == pytest.approx(want, rel=1e-12)
    total = sum(r_weight(-2, 0.75, m) for m in range(1, 200))
    assert total == pytest.approx(1.0, abs=1e-13)


def test_log_cf_backends_agree():
    ts = np.linspace(0.1, 10.0, 37)
    for eta in (0.5, 1.0, 8.0 / 3.0):
        d = np.abs(log_cf_f(eta, ts, backend="taylor") - log_cf_f(eta, ts, backend="atoms"))
        assert float(d.max()) <= 1e-12


def test_cf_at_zero_and_conjugacy():
    assert log_cf_f(1.0, 0.0) == 0.0
    assert cf_Wjgamma(0, 1.0, 0.0) == 1.0
    assert cf_Wgamma(0.75, 0.0) == 1.0
    # cf(-t) is the conjugate of cf(t)
    for t in (0.5, 2.0, 11.0):
        assert cf_Wgamma(1.0, -t) == pytest.approx(np.conj(cf_Wgamma(1.0, t)), rel=1e-12)
        assert cf_Wjgamma(1, 0.75, -t) == pytest.approx(np.conj(cf_Wjgamma(1, 0.75, t)), rel=1e-12)


def test_gaussian_inversion_curve():
    # unit-variance Gaussian: closed-form CDF to compare against
    cf = lambda t: np.exp(-0.5 * np.asarray(t) ** 2)
    curve = invert_cf_curve(cf, -10.0, 10.0, 2048)
    xs = np.linspace(-6.0, 6.0, 241)
    assert np.abs(curve.eval(xs) - norm.cdf(xs)).max() <= 5e-10
    mean, var = curve_moments(curve)
    assert abs(mean) <= 1e-9
    assert var == pytest.approx(1.0, abs=1e-8)


def test_gaussian_pointwise_inversion():
    cf = lambda t: np.exp(-0.5 * np.asarray(t) ** 2)
    res = cdf_from_cf(cf, 1.0, tol=1e-10)
    assert abs(res.value - norm.cdf(1.0)) <= 1e-11
    assert res.error <= 1e-10


def test_pointwise_inversion_reports_nonconvergence():
    # the mixture cf is too spiky for a 1e-10 budget; the failure is loud
    with pytest.raises(InversionError):
        cdf_from_cf(lambda t: cf_Wgamma(1.0, t), 2.0, tol=1e-10)


def test_nondecaying_cf_is_rejected():
    with pytest.raises(InversionError):
        cdf_from_cf(lambda t: np.ones_like(np.asarray(t, dtype=complex)), 0.0, tol=1e-6)


def test_wjg_curve_moments():
    for j, g in ((0, 1.0), (1, 0.75), (-1, 0.6)):
        eta = 2.0**j / g
        mean, var = curve_moments(wjg_cdf_curve(j, g))
        assert mean == pytest.approx(math.log2(eta), abs=1e-6)
        assert var == pytest.approx(2.0 * eta, rel=1e-6)


def test_wjg_pointwise_matches_curve():
    curve = wjg_cdf_curve(0, 1.0)
    for x in (-1.0, 0.5, 2.0, 5.0):
        res = cdf_from_cf(lambda t: cf_Wjgamma(0, 1.0, t), x, tol=1e-8)
        assert abs(res.value - float(curve.eval(x))) <= 1e-8


def test_wgamma_pointwise_matches_curve_loosely():
    # dyadic atoms alias the quadrature; the honest budget is coarser here
    curve = wgamma_cdf_curve(1.0)
    for x in (0.0, 1.0, 3.0, 7.0):
        res = cdf_from_cf(lambda t: cf_Wgamma(1.0, t), x, tol=1e-4)
        assert abs(res.value - float(curve.eval(x))) <= 1e-5


def test_wgamma_equals_level_mixture():
    # two routes to the same law: direct inversion of its cf, and the
    # level-ladder mixture of single-level laws
    curve = wgamma_cdf_curve(1.0)
    xs = np.linspace(-2.0, 14.0, 33)
    gap = np.abs(gmix_cdf(1.0, xs) - curve.eval(xs)).max()
    assert gap <= 1e-6


def test_gstar_dominates_wgamma():
    # removing the maximal jump can only shift mass downward
    curve = wgamma_cdf_curve(1.0)
    xs = np.linspace(-1.0, 12.0, 53)
    assert float((gstar_cdf(1.0, xs) - curve.eval(xs)).min()) >= -1e-8


def test_gstar_cdf_shape():
    xs = np.linspace(-4.0, 40.0, 89)
    vals = gstar_cdf(0.75, xs)
    assert np.all(np.diff(vals) >= -1e-12)
    assert vals[0] >= 0.0
    assert vals[-1] <= 1.0
    assert vals[-1] > 0.99


def test_sample_y_deterministic_and_shaped():
    a = sample_Y(1, 0.75, truncation=500, reps=64, seed=9)
    b = sample_Y(1, 0.75, truncation=500, reps=64, seed=9)
    c = sample_Y(1, 0.75, truncation=500, reps=64, seed=10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (64,)
    assert np.all(np.isfinite(a))


def test_sample_y_matches_gstar_distribution():
    # removing the top jump and the drift constant leaves the gstar law
    ys = sample_Y(1, 1.0, truncation=2000, reps=40_000, seed=21)
    ys = np.sort(ys - a_const(1, 1.0))
    grid = np.linspace(-1.0, 8.0, 19)
    emp = np.searchsorted(ys, grid, side="right") / ys.size
    ks = np.abs(emp - gstar_cdf(1.0, grid)).max()
    assert ks <= 0.02


def test_sample_y_untrimmed_matches_wgamma():
    ys = np.sort(sample_Y(0, 1.0, truncation=2000, reps=40_000, seed=22))
    curve = wgamma_cdf_curve(1.0)
    grid = np.linspace(-1.0, 8.0, 19)
    emp = np.searchsorted(ys, grid, side="right") / ys.size
    ks = np.abs(emp - curve.eval(grid)).max()
    assert ks <= 0.02


def test_series_center_matches_partial_centering():
    assert series_center(0, 1.0, 100) == centering(100, 1.0, 0)
    assert series_center(2, 0.75, 64) == centering(64, 0.75, 2)


def test_centering_anchor_and_closed_form():
    assert centering(8, 1.0, 0) == 3.125
    for n, g in ((1, 1.0), (37, 0.8), (513, 0.52), (4096, 1.0)):
        assert centering(n, g, 0) == pytest.approx(centering_closed(n, g), abs=1e-12)


def test_a_const_values():
    assert a_const(0, 1.0) == 0.0
    # psi(1) = psi(2) = 1, psi(3) = 1.5
    assert a_const(3, 1.0) == pytest.approx(2.0, rel=1e-15)


def test_xi_anchors():
    xi, f = xi_and_f(1.0)
    assert xi == 0.0
    assert f == 0.0
    xi, f = xi_and_f(0.75)
    assert f == pytest.approx(1.0 / 3.0, abs=1e-15)
    with pytest.raises(ValueError):
        xi_and_f(0.5)


def test_u_gamma_const_anchor():
    assert u_gamma_const(1.0) == -0.5


def test_chernoff_h_shape():
    assert chernoff_h(0.0) == 0.0
    assert chernoff_h(2.0) == pytest.approx(4.0 * math.log(2.0) - 2.0, rel=1e-14)
    xs = np.linspace(0.01, 40.0, 500)
    for x in xs:
        h = chernoff_h(float(x))
        assert x * x / (4.0 + x) - 1e-12 <= h <= x * x / 2.0 + 1e-12


def test_chernoff_bound_defaults_to_gamma_n():
    n, j, x = 100, 1, 1.5
    assert chernoff_bound(n, j, None, x) == chernoff_bound(n, j, gamma_n(n), x)
    eta = 2.0**j / gamma_n(n)
    assert chernoff_bound(n, j, None, x) == pytest.approx(
        math.exp(-chernoff_h(x) / eta), rel=1e-12)
