import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from rsma_sim.exceptions import DomainError, QuadratureError
from rsma_sim.specfun import (
    NoncentralChi2,
    adaptive_simpson,
    bessel_i0_scaled,
    integrate_semi_infinite,
    ncx2_cdf,
    ncx2_mgf,
    ncx2_pdf,
    ncx2_sample,
)


def series_i0e(x, terms=80):
    """Independent high-precision oracle: power series in mpmath."""
    mpmath.mp.dps = 40
    x = mpmath.mpf(x)
    s = mpmath.fsum((x / 2) ** (2 * m) / mpmath.factorial(m) ** 2 for m in range(terms))
    return float(s * mpmath.exp(-x))


def asymptotic_i0e(x, terms=8):
    total, term = 1.0, 1.0
    for k in range(1, terms):
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        total += term
    return total / math.sqrt(2 * math.pi * x)


# ---------------------------------------------------------------- Bessel
def test_i0e_at_zero():
    assert bessel_i0_scaled(0.0) == 1.0


def test_i0e_at_one():
    # series oracle with >= 30 terms
    ref = series_i0e(1.0, terms=40)
    assert ref == pytest.approx(0.465759, abs=1e-6)  # six-decimal literal, truncated
    assert bessel_i0_scaled(1.0) == pytest.approx(ref, rel=1e-12)


def test_i0e_large_argument():
    x = 1e4
    assert bessel_i0_scaled(x) == pytest.approx(1 / math.sqrt(2 * math.pi * x) * (1 + 1 / (8 * x)), rel=1e-6)


@pytest.mark.parametrize("x", np.logspace(-3, 6, 25))
def test_i0e_against_mpmath(x):
    mpmath.mp.dps = 30
    ref = float(mpmath.besseli(0, x) * mpmath.exp(-x))
    assert bessel_i0_scaled(x) == pytest.approx(ref, rel=1e-12)


def test_i0e_array_matches_scalar():
    xs = np.concatenate([np.linspace(0, 40, 401), np.logspace(1, 6, 50)])
    arr = bessel_i0_scaled(xs)
    assert arr.shape == xs.shape
    np.testing.assert_allclose(arr, [bessel_i0_scaled(float(x)) for x in xs], rtol=1e-13)


@pytest.mark.parametrize("bad", [-1e-9, -3.0, math.inf, math.nan])
def test_i0e_domain(bad):
    with pytest.raises(DomainError):
        bessel_i0_scaled(bad)
    with pytest.raises(DomainError):
        bessel_i0_scaled(np.array([1.0, bad]))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_i0e_monotone_decreasing_and_bounded(a, b):
    lo, hi = min(a, b), max(a, b)
    assert 0 < bessel_i0_scaled(hi) <= bessel_i0_scaled(lo) <= 1.0


# ---------------------------------------------------------------- density
def test_pdf_central():
    assert ncx2_pdf(0.0, 2.0) == pytest.approx(0.5 * math.exp(-1), rel=1e-15)
    assert ncx2_pdf(0.0, 2.0) == pytest.approx(0.18394, abs=1e-5)


def test_pdf_at_origin():
    assert ncx2_pdf(10.0, 0.0) == pytest.approx(0.5 * math.exp(-5), rel=1e-15)


def mp_ncx2_pdf(lam, x):
    mpmath.mp.dps = 50
    x, lam = mpmath.mpf(x), mpmath.mpf(lam)
    return float(mpmath.exp(-(x + lam) / 2) * mpmath.besseli(0, mpmath.sqrt(lam * x)) / 2)


@pytest.mark.parametrize("lam", [0.0, 1.0, 10.0, 100.0, 1e4])
def test_pdf_against_mpmath(lam):
    # scipy's ncx2.pdf underflows to zero far in the lower tail at lam = 1e4,
    # so the high-precision closed form is the reference here
    xs = np.linspace(0, lam + 20 * math.sqrt(lam + 2) + 20, 120)[1:]
    ref = np.array([mp_ncx2_pdf(lam, x) for x in xs])
    keep = ref > 1e-290
    np.testing.assert_allclose(ncx2_pdf(lam, xs)[keep], ref[keep], rtol=1e-10)


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
def test_pdf_against_scipy_in_bulk(lam):
    xs = np.linspace(0.01, lam + 8 * math.sqrt(lam + 2) + 8, 200)
    np.testing.assert_allclose(ncx2_pdf(lam, xs), stats.ncx2.pdf(xs, 2, lam), rtol=1e-7)


def test_pdf_no_overflow_for_huge_noncentrality():
    lam = 1e6
    v = ncx2_pdf(lam, lam)
    assert math.isfinite(v) and v > 0


@pytest.mark.parametrize("lam", [0.0, 1.0, 10.0, 100.0])
def test_pdf_normalization(lam):
    total = integrate_semi_infinite(lambda x: ncx2_pdf(lam, x), 1e-9, noncentrality=lam)
    assert abs(total - 1.0) < 1e-8


def test_pdf_domain():
    with pytest.raises(DomainError):
        ncx2_pdf(1.0, -0.5)
    with pytest.raises(DomainError):
        NoncentralChi2(-1.0)


# ---------------------------------------------------------------- CDF
@pytest.mark.parametrize("x", [0.0, 0.3, 2.0, 7.5, 40.0, 200.0])
def test_cdf_central_is_exponential(x):
    assert ncx2_cdf(0.0, x) == pytest.approx(-math.expm1(-x / 2), abs=1e-14)


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
def test_cdf_against_scipy(lam):
    xs = np.linspace(0.01, lam + 10 * math.sqrt(lam + 2) + 10, 50)
    np.testing.assert_allclose(ncx2_cdf(lam, xs), stats.ncx2.cdf(xs, 2, lam), atol=1e-9)
    assert ncx2_cdf(lam, 0.0) == 0.0
    assert ncx2_cdf(lam, 1e5) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("lam", [0.0, 1.0, 10.0, 100.0])
def test_cdf_derivative_matches_pdf(lam):
    rng = np.random.default_rng(7)
    hi = lam + 6 * math.sqrt(lam + 2) + 6
    h = 1e-3
    for x in rng.uniform(2 * h, hi, 20):
        deriv = (ncx2_cdf(lam, x + h, tol=1e-13) - ncx2_cdf(lam, x - h, tol=1e-13)) / (2 * h)
        assert deriv == pytest.approx(ncx2_pdf(lam, x), abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 50), st.floats(0, 200), st.floats(0, 200))
def test_cdf_monotone(lam, a, b):
    lo, hi = min(a, b), max(a, b)
    assert ncx2_cdf(lam, hi) >= ncx2_cdf(lam, lo)


def test_cdf_array_monotone_in_sorted_order():
    xs = np.random.default_rng(3).uniform(0, 60, 500)
    F = ncx2_cdf(10.0, xs)
    order = np.argsort(xs)
    assert np.all(np.diff(F[order]) >= 0)


@pytest.mark.slow
def test_cdf_median_matches_sampler():
    d = NoncentralChi2(10.0)
    lo, hi = 0.0, 100.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ncx2_cdf(d, mid) < 0.5 else (lo, mid)
    median = 0.5 * (lo + hi)
    emp = np.median(ncx2_sample(d, np.random.default_rng(11), 10 ** 6))
    assert emp == pytest.approx(median, rel=0.005)


# ---------------------------------------------------------------- sampler
@pytest.mark.slow
@pytest.mark.parametrize("lam", [0.0, 10.0])
def test_sampler_moments(lam):
    x = ncx2_sample(lam, np.random.default_rng(5), 10 ** 6)
    assert x.mean() == pytest.approx(2 + lam, rel=0.01)
    assert x.var() == pytest.approx(4 + 4 * lam, rel=0.01)
    # 3 sigma on the mean
    assert abs(x.mean() - (2 + lam)) < 3 * math.sqrt((4 + 4 * lam) / x.size)


def test_sampler_deterministic():
    a = ncx2_sample(3.0, np.random.default_rng(9), 100)
    b = ncx2_sample(3.0, np.random.default_rng(9), 100)
    np.testing.assert_array_equal(a, b)


@pytest.mark.slow
def test_sampler_ks_against_cdf():
    x = ncx2_sample(10.0, np.random.default_rng(21), 10 ** 6)
    res = stats.kstest(x, lambda v: ncx2_cdf(10.0, v))
    assert res.statistic < 0.002


# ---------------------------------------------------------------- MGF
def test_mgf_values():
    assert ncx2_mgf(0.0, 0.0) == 1.0
    assert ncx2_mgf(7.0, 0.0) == 1.0
    assert ncx2_mgf(0.0, 0.25) == pytest.approx(2.0)
    assert ncx2_mgf(10.0, 0.25) == pytest.approx(2 * math.exp(5))
    assert ncx2_mgf(10.0, 0.25) == pytest.approx(296.826, abs=1e-3)


def test_mgf_domain():
    with pytest.raises(DomainError):
        ncx2_mgf(1.0, 0.5)


@pytest.mark.slow
@pytest.mark.parametrize("lam,t", [
    (0.0, 0.1), (0.0, 0.25), (0.0, 0.4),
    (1.0, 0.1), (1.0, 0.25), (1.0, 0.4),
    (10.0, 0.1), (10.0, 0.25),
])
def test_mgf_identity_against_sampler(lam, t):
    # lam = 10 at t = 0.4 is left out: exp(tX) has infinite variance and the
    # bulk of its mean sits where 1e6 draws never reach
    x = ncx2_sample(lam, np.random.default_rng(1), 10 ** 6)
    w = np.exp(t * x)
    se = w.std(ddof=1) / math.sqrt(w.size)
    assert abs(w.mean() - ncx2_mgf(lam, t)) < 3 * se


# ---------------------------------------------------------------- quadrature
def test_integrate_exponential_density():
    tol = 1e-9
    assert integrate_semi_infinite(lambda x: math.exp(-x / 2) / 2, tol) == pytest.approx(1.0, abs=tol)


def test_integrate_ncx2_density():
    tol = 1e-9
    f = lambda x: ncx2_pdf(10.0, x)  # noqa: E731
    assert integrate_semi_infinite(f, tol, noncentrality=10.0) == pytest.approx(1.0, abs=tol)


def test_integrate_ncx2_mean():
    tol = 1e-9
    f = lambda x: x * ncx2_pdf(4.0, x)  # noqa: E731
    assert integrate_semi_infinite(f, tol, noncentrality=4.0) == pytest.approx(6.0, abs=tol)


def test_adaptive_simpson_polynomial_exact():
    assert adaptive_simpson(lambda x: x ** 3 - 2 * x, 0.0, 3.0, 1e-12, n_init=1) == pytest.approx(81 / 4 - 9)


def test_quadrature_budget_exhaustion_carries_estimate():
    with pytest.raises(QuadratureError) as info:
        adaptive_simpson(lambda x: math.sin(1.0 / x) if x else 0.0, 0.0, 1.0, 1e-14, max_evals=500)
    assert math.isfinite(info.value.estimate)


def test_quadrature_bad_tolerance():
    with pytest.raises(DomainError):
        integrate_semi_infinite(lambda x: 1.0, tol=0.0)
