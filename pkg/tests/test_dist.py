import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf
from scipy import integrate, stats

from circmax.dist import (
    FrechetParams,
    GevParams,
    frechet_cdf,
    frechet_loglik,
    gev_cdf,
    gev_loglik,
    gev_quantile,
    gpd_cdf,
    gpd_isf,
    gpd_quantile,
)

shapes = st.floats(-0.45, 0.45)
probs = st.floats(1e-6, 1 - 1e-6)


def gev(loc=0.0, scale=1.0, shape=0.0):
    return GevParams(loc, scale, shape)


# ---------------------------------------------------------------- GPD


def test_gpd_cdf_examples():
    assert gpd_cdf(0.0, 0.2) == 0.0
    assert gpd_cdf(1.0, 0.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert gpd_cdf(5.0, -0.2) == 1.0
    assert gpd_cdf(7.0, -0.2) == 1.0
    assert gpd_cdf(-1.0, 0.0) == 0.0


def test_gpd_cdf_high_precision_oracle():
    mp.dps = 40
    exact = 1 - mpf("1.2") ** -5
    assert gpd_cdf(1.0, 0.2) == pytest.approx(float(exact), rel=1e-14)
    assert float(exact) == pytest.approx(0.5981224, abs=1e-7)


def test_gpd_cdf_matches_scipy():
    x = np.linspace(0, 4.9, 50)
    for g in (-0.2, -1e-3, 0.0, 0.3):
        np.testing.assert_allclose(gpd_cdf(x, g), stats.genpareto.cdf(x, g), rtol=1e-12, atol=1e-15)


def test_gpd_quantile_examples():
    assert gpd_quantile(0.0, -0.1) == 0.0
    assert gpd_quantile(1 - math.exp(-1), 0.0) == pytest.approx(1.0, rel=1e-14)
    assert gpd_quantile(0.59812, 0.2) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("p", [-0.1, 1.0, 1.5, float("nan")])
def test_gpd_quantile_rejects(p):
    with pytest.raises(ValueError):
        gpd_quantile(p, 0.1)


@given(st.floats(0.0, 0.999999), shapes)
def test_gpd_roundtrip(p, g):
    x = gpd_quantile(p, g)
    assert gpd_cdf(x, g) == pytest.approx(p, rel=1e-12, abs=1e-15)


@given(st.floats(1e-300, 1.0), shapes)
def test_gpd_isf_is_quantile_of_survival(s, g):
    x = gpd_isf(s, g)
    if s > 1e-10:
        assert x == pytest.approx(gpd_quantile(1 - s, g), rel=1e-6, abs=1e-9)
    assert 1 - gpd_cdf(x, g) == pytest.approx(s, rel=1e-6, abs=1e-15) or s < 1e-15


@pytest.mark.parametrize("g", [-0.4, -0.1, 0.0, 0.2, 0.45])
def test_gpd_density_integrates_to_one(g):
    # analytic density of GPD(0, 1, g)
    upper = -1 / g if g < 0 else np.inf

    def dens(x):
        return math.exp(-(1 / g + 1) * math.log1p(g * x)) if g else math.exp(-x)

    val, _ = integrate.quad(dens, 0, upper, limit=200)
    assert val == pytest.approx(1.0, abs=1e-6)
    assert gpd_cdf(1e6 if g >= 0 else upper, g) == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------- GEV


def test_gev_examples():
    assert gev_cdf(0.0, gev()) == pytest.approx(math.exp(-1), rel=1e-15)
    for g in (-0.3, 0.1, 0.7):
        assert gev_cdf(2.5, gev(2.5, 3.0, g)) == pytest.approx(math.exp(-1), rel=1e-15)
    mp.dps = 40
    exact = float(mp.exp(-mpf("1.5") ** -2))
    assert gev_cdf(1.0, gev(0, 1, 0.5)) == pytest.approx(exact, rel=1e-14)
    # the quoted 0.6412160 agrees with the closed form to four decimals only
    assert exact == pytest.approx(0.6412160, abs=1e-4)
    assert gev_quantile(math.exp(-1), gev()) == pytest.approx(0.0, abs=1e-15)
    assert gev_quantile(0.99, gev()) == pytest.approx(4.600149, abs=1e-6)


def test_gev_outside_support():
    assert gev_cdf(-3.0, gev(0, 1, 0.5)) == 0.0
    assert gev_cdf(3.0, gev(0, 1, -0.5)) == 1.0
    assert gev_loglik(gev(0, 1, -0.5), 3.0) == -math.inf
    assert gev_loglik(gev(0, 1, 0.5), -2.0) == -math.inf


def test_gev_loglik_examples():
    assert gev_loglik(gev(), 0.0) == pytest.approx(-1.0, rel=1e-15)
    assert gev_loglik(gev(0, 2, 0), 0.0) == pytest.approx(-1 - math.log(2), rel=1e-15)
    assert -1 - math.log(2) == pytest.approx(-1.6931472, abs=1e-7)


@pytest.mark.parametrize("g", [-0.4, -0.1, 0.0, 0.1, 0.4])
def test_gev_matches_scipy(g):
    th = gev(1.5, 2.0, g)
    frozen = stats.genextreme(-g, loc=1.5, scale=2.0)
    x = frozen.ppf(np.linspace(0.001, 0.999, 41))
    np.testing.assert_allclose(gev_cdf(x, th), frozen.cdf(x), rtol=1e-12)
    np.testing.assert_allclose(gev_loglik(th, x), frozen.logpdf(x), rtol=1e-11)


def test_gev_quantile_rejects():
    for p in (0.0, 1.0, -0.5):
        with pytest.raises(ValueError):
            gev_quantile(p, gev())


@settings(max_examples=100)
@given(probs, st.floats(-5, 5), st.floats(0.1, 10), shapes)
def test_gev_roundtrip(p, loc, scale, g):
    th = gev(loc, scale, g)
    assert abs(gev_cdf(gev_quantile(p, th), th) - p) < 1e-10


@given(shapes, st.lists(st.floats(-20, 20), min_size=2, max_size=20))
def test_gev_cdf_monotone(g, xs):
    xs = np.sort(xs)
    p = gev_cdf(xs, gev(0, 1, g))
    assert np.all(np.diff(p) >= 0)


@pytest.mark.parametrize("g", [-0.4, 0.0, 0.3])
def test_gev_density_integrates_to_one(g):
    th = gev(0.5, 1.3, g)
    lo, hi = th.support()
    val, _ = integrate.quad(lambda x: math.exp(gev_loglik(th, x)), max(lo, -50.0), hi, limit=400)
    assert val == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("sign", [-1, 1])
def test_gev_continuity_at_zero_shape(sign):
    g = sign * 1e-8
    x = np.linspace(-2, 6, 17)
    p = np.linspace(0.01, 0.99, 17)
    np.testing.assert_allclose(gev_cdf(x, gev(0, 1, g)), gev_cdf(x, gev()), atol=1e-6)
    np.testing.assert_allclose(gev_quantile(p, gev(0, 1, g)), gev_quantile(p, gev()), atol=1e-6)
    np.testing.assert_allclose(gev_loglik(gev(0, 1, g), x), gev_loglik(gev(), x), atol=1e-6)


def test_gev_branch_threshold_both_sides():
    for g in (0.9e-9, 1.1e-9, -0.9e-9, -1.1e-9):
        assert gev_quantile(0.99, gev(0, 1, g)) == pytest.approx(4.600149, abs=1e-6)


def test_gev_params_validation():
    with pytest.raises(ValueError):
        GevParams(0, 0, 0.1)
    with pytest.raises(ValueError):
        GevParams(0, -1, 0.1)
    assert gev(0, 1, 0.5).support() == (-2.0, math.inf)
    assert gev(0, 1, -0.5).support() == (-math.inf, 2.0)


# ---------------------------------------------------------------- Frechet


def test_frechet_loglik_examples():
    th = FrechetParams(1.0, 1.0)
    assert frechet_loglik(th, 1.0) == pytest.approx(-1.0, rel=1e-15)
    assert frechet_loglik(th, math.e) == pytest.approx(-math.exp(-1) - 2, rel=1e-15)
    assert frechet_loglik(FrechetParams(2, 3), 3.0) == pytest.approx(math.log(2 / 3) - 1, rel=1e-15)
    assert math.log(2 / 3) - 1 == pytest.approx(-1.4054651, abs=1e-7)


def test_frechet_loglik_rejects_nonpositive():
    with pytest.raises(ValueError):
        frechet_loglik(FrechetParams(1, 1), 0.0)
    with pytest.raises(ValueError):
        frechet_loglik(FrechetParams(1, 1), [1.0, -2.0])
    with pytest.raises(ValueError):
        FrechetParams(0.0, 1.0)


@given(st.floats(0.2, 5), st.floats(0.1, 10))
def test_frechet_equals_reparametrized_gev(a, s):
    th = FrechetParams(a, s)
    x = s * np.exp(np.linspace(-3, 3, 25))
    np.testing.assert_allclose(frechet_cdf(x, th), gev_cdf(x, th.as_gev()), atol=1e-10)
    np.testing.assert_allclose(frechet_loglik(th, x), gev_loglik(th.as_gev(), x), rtol=1e-9, atol=1e-9)


def test_frechet_matches_scipy():
    th = FrechetParams(1.7, 2.5)
    x = np.linspace(0.3, 30, 40)
    np.testing.assert_allclose(frechet_cdf(x, th), stats.invweibull.cdf(x, 1.7, scale=2.5), rtol=1e-12)
    np.testing.assert_allclose(frechet_loglik(th, x), stats.invweibull.logpdf(x, 1.7, scale=2.5), rtol=1e-12)


def test_frechet_density_integrates_to_one():
    th = FrechetParams(1.3, 2.0)
    val, _ = integrate.quad(lambda x: math.exp(frechet_loglik(th, x)), 0, np.inf, limit=400)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_frechet_extreme_arguments_finite():
    th = FrechetParams(3.0, 1.0)
    assert np.isfinite(frechet_loglik(th, 1e300))
    assert frechet_cdf(1e-300, th) == 0.0


def test_scalar_in_scalar_out():
    assert isinstance(gpd_cdf(1.0, 0.1), float)
    assert isinstance(gev_quantile(0.5, gev()), float)
    assert isinstance(gev_cdf(np.array([0.0, 1.0]), gev()), np.ndarray)
