import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy import special as sp

from gvjump.special import (
    INV_SQRT_2PI,
    bessel_k,
    bessel_k_scaled,
    log_theta,
    positive_part_moment,
    theta,
    theta_array,
    tilted_cdf,
    tilted_moment,
    tilted_pdf,
    tilted_sf,
)

mpmath.mp.dps = 50


def theta_oracle(u):
    u = mpmath.mpf(u)
    return u * mpmath.ncdf(u) + mpmath.npdf(u)


def test_theta_at_zero():
    assert theta(0.0) == pytest.approx(INV_SQRT_2PI, rel=1e-15)
    assert theta(0.0) == pytest.approx(0.3989422804014327, rel=1e-15)


@pytest.mark.parametrize("u", [0.5, 2.0, 7.0])
def test_theta_antisymmetric_part(u):
    assert theta(u) - theta(-u) == pytest.approx(u, abs=1e-14)


def test_theta_at_ten():
    # theta(10) = 10 + delta with delta = theta(-10) ~ 7.7e-25, far below one ulp of 10
    delta = float(theta_oracle(-10))
    assert 0.0 < delta < 1e-22
    assert theta(-10.0) == pytest.approx(delta, rel=1e-12)
    assert theta(10.0) == 10.0


def test_theta_relative_accuracy_against_mpmath():
    worst = worst_log = 0.0
    for u in np.linspace(-40.0, 40.0, 801):
        ref = theta_oracle(u)
        # relative error of theta is the absolute error of log theta, also past float underflow
        worst_log = max(worst_log, abs(log_theta(u) - float(mpmath.log(ref))))
        if ref > 1e-300:
            worst = max(worst, abs(theta(u) - float(ref)) / float(ref))
    assert worst <= 1e-12
    assert worst_log <= 1e-12


@pytest.mark.parametrize("u", [-41.0, -60.0, -100.0, -1e3])
def test_theta_far_tail_is_graceful(u):
    val = theta(u)
    assert not math.isnan(val)
    assert val >= 0.0
    assert log_theta(u) == pytest.approx(float(mpmath.log(theta_oracle(u))), rel=1e-12)


def test_theta_rejects_nan():
    with pytest.raises(ValueError):
        theta(float("nan"))
    with pytest.raises(ValueError):
        theta_array(np.array([0.0, np.nan]))


def test_theta_array_matches_scalar():
    us = np.linspace(-45.0, 45.0, 4001)
    vec = theta_array(us)
    ref = np.array([theta(u) for u in us])
    # compare where both are normal floats; the subnormal range carries no relative precision
    normal = ref > 1e-300
    assert np.max(np.abs(vec[normal] - ref[normal]) / ref[normal]) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-8.0, 8.0))
def test_theta_identity_and_lower_bound(u):
    assert abs(theta(u) - theta(-u) - u) <= 1e-10
    assert theta(u) >= max(u, 0.0)


def test_theta_increasing_and_convex():
    us = np.linspace(-10.0, 10.0, 2001)
    vals = np.array([theta(u) for u in us])
    assert np.all(np.diff(vals) > 0.0)
    h = us[1] - us[0]
    second = (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / (h * h)
    assert second.min() >= -1e-8


@pytest.mark.parametrize("u,n", [(0.0, 1), (1.3, 2), (-2.0, 3)])
def test_positive_part_moment(u, n):
    ref = mpmath.quad(lambda g: (u + g) ** n * mpmath.npdf(g), [-u, mpmath.inf])
    assert positive_part_moment(u, n) == pytest.approx(float(ref), rel=1e-10)
    if n == 1:
        assert positive_part_moment(u, 1) == pytest.approx(theta(u), rel=1e-10)


def test_tilted_pdf_examples():
    assert tilted_pdf(0.0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert tilted_pdf(2.0, -3.0) == 0.0
    assert tilted_pdf(2.0, -2.0) == 0.0


@pytest.mark.parametrize("m", [-3.0, 0.0, 3.0])
def test_tilted_pdf_normalized(m):
    total, _ = integrate.quad(lambda y: tilted_pdf(m, y), -m, -m + 12 + abs(m), epsabs=1e-14, epsrel=1e-13, limit=200)
    assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("m", [-6.0, -1.0, 0.0, 2.5])
def test_tilted_cdf_against_quadrature(m):
    for y in (-m + 0.01, -m + 0.3, 0.7, 2.0):
        if y <= -m:
            continue
        ref, _ = integrate.quad(lambda s: tilted_pdf(m, s), -m, y, epsabs=1e-14, epsrel=1e-12)
        assert tilted_cdf(m, y) == pytest.approx(ref, abs=1e-12)
        assert tilted_cdf(m, y) + tilted_sf(m, y) == pytest.approx(1.0, abs=1e-15)


def test_tilted_moment_examples():
    for m in (-3.0, 0.0, 3.0):
        assert tilted_moment(m, 0) == pytest.approx(1.0, abs=1e-9)
    # E[G * G_+] / theta(0) with E[G^2; G > 0] = 1/2
    assert tilted_moment(0.0, 1) == pytest.approx(0.5 / INV_SQRT_2PI, abs=1e-9)
    assert tilted_moment(0.0, 1) == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-9)
    # the excess m + Y is close to Gamma(2, |m|) for m << 0, so E[Y] = -m + 2/|m| + O(|m|^-3)
    ref = mpmath.quad(lambda y: y * (y - 10) * mpmath.exp(-y * y / 2), [10, mpmath.inf]) / (
        theta_oracle(-10) * mpmath.sqrt(2 * mpmath.pi)
    )
    assert tilted_moment(-10.0, 1) == pytest.approx(float(ref), abs=1e-9)
    assert tilted_moment(-10.0, 1) == pytest.approx(10.0 + 2.0 / 10.0, abs=1e-2)


def test_tilted_moment_against_mpmath():
    m = 1.7
    norm = theta_oracle(m) * mpmath.sqrt(2 * mpmath.pi)
    for k in range(5):
        ref = mpmath.quad(lambda y: y**k * (m + y) * mpmath.exp(-y * y / 2), [-m, mpmath.inf]) / norm
        assert tilted_moment(m, k) == pytest.approx(float(ref), abs=1e-9)


def test_tilted_moment_rejects_high_order():
    with pytest.raises(ValueError):
        tilted_moment(0.0, 5)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5])
@pytest.mark.parametrize("c", [1e-3, 0.25, 1.0, 10.0, 50.0])
def test_bessel_k_against_scipy(nu, c):
    assert bessel_k(nu, c) == pytest.approx(sp.kv(nu, c), rel=1e-8)
    assert bessel_k_scaled(nu, c) == pytest.approx(sp.kve(nu, c), rel=1e-8)


def test_bessel_k_rejects_nonpositive():
    with pytest.raises(ValueError):
        bessel_k(1.0, 0.0)
