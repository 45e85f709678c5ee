"""Special functions behind the corrected jump rate.

``theta(u) = E[(u + G)_+]`` for a standard Gaussian ``G``; the tilted density
``f_m(y) = (m + y)_+ exp(-y^2/2) / (theta(m) sqrt(2 pi))`` is the law of the
Gaussian increment at an accepted jump.

The left tail of ``theta`` is written as ``phi(z) * h(z)`` with
``h(z) = 1 - z R(z)`` and ``R`` the Mills ratio. ``h`` is evaluated without
cancellation from a continued fraction (moderate ``z``) or its asymptotic
series (large ``z``).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
_INV_SQRT2 = 1.0 / math.sqrt(2.0)

_CF_SWITCH = 2.5
_ASYMPTOTIC_SWITCH = 40.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""


def _h_scalar(z: float) -> float:
    """``theta(-z) / phi(z)`` for ``z >= 0``."""
    if z < _CF_SWITCH:
        r = 0.5 * math.erfc(z * _INV_SQRT2) * SQRT_2PI * math.exp(0.5 * z * z)
        return 1.0 - z * r
    if z <= _ASYMPTOTIC_SWITCH:
        # R(z) = 1/(z + c), c = 1/(z + 2/(z + 3/(z + ...))), so h = c/(z + c)
        terms = 80 if z < 4.0 else (40 if z < 8.0 else 20)
        t = 0.0
        for k in range(terms, 1, -1):
            t = k / (z + t)
        c = 1.0 / (z + t)
        return c / (z + c)
    w = 1.0 / (z * z)
    return w * (1.0 + w * (-3.0 + w * (15.0 + w * (-105.0 + w * (945.0 - 10395.0 * w)))))


def theta(u: float) -> float:
    """``E[(u + G)_+] = u P(G > -u) + exp(-u^2/2)/sqrt(2 pi)``."""
    if u != u:
        raise ValueError("theta is undefined for NaN")
    if u >= 0.0:
        return u * 0.5 * math.erfc(-u * _INV_SQRT2) + math.exp(-0.5 * u * u) * INV_SQRT_2PI
    z = -u
    if z > _ASYMPTOTIC_SWITCH:
        return math.exp(-0.5 * z * z - LOG_SQRT_2PI + math.log(_h_scalar(z)))
    return math.exp(-0.5 * z * z) * INV_SQRT_2PI * _h_scalar(z)


def log_theta(u: float) -> float:
    """``log theta(u)``, finite for every finite ``u``."""
    if u != u:
        raise ValueError("theta is undefined for NaN")
    if u >= 0.0:
        return math.log(theta(u))
    z = -u
    return -0.5 * z * z - LOG_SQRT_2PI + math.log(_h_scalar(z))


def gaussian_cdf(u: float) -> float:
    return 0.5 * math.erfc(-u * _INV_SQRT2)


def theta_array(u) -> np.ndarray:
    """Vectorised ``theta``, same branches as the scalar version."""
    u = np.asarray(u, dtype=float)
    if np.isnan(u).any():
        raise ValueError("theta is undefined for NaN")
    out = np.empty_like(u)
    pos = u >= 0.0
    up = u[pos]
    out[pos] = up * 0.5 * special.erfc(-up * _INV_SQRT2) + np.exp(-0.5 * up * up) * INV_SQRT_2PI
    z = -u[~pos]
    out[~pos] = np.exp(-0.5 * z * z - LOG_SQRT_2PI + np.log(_h_array(z)))
    return out


def log_theta_array(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.vectorize(log_theta, otypes=[float])(u)


def _mills(y: np.ndarray) -> np.ndarray:
    """Mills ratio ``Q(y)/phi(y)``, any real ``y``."""
    return math.sqrt(math.pi / 2.0) * special.erfcx(y * _INV_SQRT2)


def _h_array(y: np.ndarray) -> np.ndarray:
    """``theta(-y)/phi(y)`` for any real ``y``."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y < _CF_SWITCH
    out[small] = 1.0 - y[small] * _mills(y[small])
    out[~small] = np.vectorize(_h_scalar, otypes=[float])(y[~small])
    return out


def tilted_log_pdf(m: float, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    s = m + y
    with np.errstate(divide="ignore"):
        return np.where(s > 0, np.log(np.where(s > 0, s, 1.0)) - 0.5 * y * y - LOG_SQRT_2PI - log_theta(m), -np.inf)


def tilted_pdf(m: float, y):
    """Density ``f_m(y)``; zero for ``y <= -m``."""
    if not math.isfinite(m):
        raise ValueError("m must be finite")
    out = np.exp(tilted_log_pdf(m, y))
    return float(out) if out.ndim == 0 else out


def tilted_sf(m: float, y):
    """Survival function ``P(Y > y)`` of ``f_m``.

    Uses ``int_y^inf (m+s) phi(s) ds = phi(y) * (h(y) + (y+m) R(y))``, in which
    both terms are non-negative on the support.
    """
    y = np.asarray(y, dtype=float)
    yc = np.maximum(y, -m)
    log_num = -0.5 * yc * yc - LOG_SQRT_2PI + np.log(_h_array(yc) + (yc + m) * _mills(yc))
    out = np.exp(np.minimum(log_num - log_theta(m), 0.0))
    out = np.where(y <= -m, 1.0, out)
    return float(out) if out.ndim == 0 else out


def tilted_cdf(m: float, y):
    """Distribution function of ``f_m``."""
    out = 1.0 - np.asarray(tilted_sf(m, y))
    return float(out) if out.ndim == 0 else out


def tilted_moment(m: float, k: int) -> float:
    """k-th moment of ``f_m`` by adaptive quadrature (absolute error <= 1e-9).

    The support ``[-m, inf)`` is truncated at ``-m + 12 + |m|``; beyond it the
    Gaussian factor is below 1e-30 relative to the bulk.
    """
    if not 0 <= k <= 4:
        raise ValueError("moments are available for k in 0..4")
    lo = -m
    hi = -m + 12.0 + abs(m)
    mode = 0.5 * (math.sqrt(m * m + 4.0) - m)
    lt = log_theta(m)

    def integrand(y):
        s = m + y
        if s <= 0.0:
            return 0.0
        return y**k * math.exp(math.log(s) - 0.5 * y * y - LOG_SQRT_2PI - lt)

    pts = [p for p in (mode, 0.0) if lo < p < hi]
    value, err = integrate.quad(integrand, lo, hi, points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=400)
    if err > 1e-9:
        raise QuadratureError(f"tilted_moment(m={m}, k={k}) error estimate {err:.3g}")
    return value


def positive_part_moment(u: float, n: int) -> float:
    """``E[(u + G)_+^n]`` by quadrature over ``[-u, inf)``."""

    def integrand(g):
        return (u + g) ** n * math.exp(-0.5 * g * g) * INV_SQRT_2PI

    hi = max(-u, 0.0) + 40.0
    value, err = integrate.quad(integrand, -u, hi, epsabs=1e-14, epsrel=1e-13, limit=400)
    if err > 1e-9 * max(1.0, abs(value)):
        raise QuadratureError(f"positive_part_moment(u={u}, n={n}) error estimate {err:.3g}")
    return value


def bessel_k_scaled(nu: float, c: float) -> float:
    """``exp(c) K_nu(c)`` from ``K_nu(c) = int_0^inf exp(-c cosh t) cosh(nu t) dt``."""
    if not c > 0:
        raise ValueError("bessel_k requires c > 0")
    nu = abs(nu)
    # integrand exp(-c (cosh t - 1) + nu t) is negligible once the exponent < -60
    t_max = 1.0
    while c * math.expm1(t_max) * 0.5 * (1.0 - math.exp(-t_max)) - nu * t_max < 60.0 and t_max < 800.0:
        t_max *= 1.5

    def integrand(t):
        # c (cosh t - 1) = 2 c sinh(t/2)^2 avoids cancellation near 0
        s = math.sinh(0.5 * t)
        return math.exp(-2.0 * c * s * s) * math.cosh(nu * t)

    value, err = integrate.quad(integrand, 0.0, t_max, epsabs=0.0, epsrel=1e-13, limit=500)
    if err > 1e-10 * value:
        raise QuadratureError(f"bessel_k(nu={nu}, c={c}) error estimate {err:.3g}")
    return value


def bessel_k(nu: float, c: float) -> float:
    """Modified Bessel function of the second kind, by quadrature."""
    return math.exp(-c) * bessel_k_scaled(nu, c)
