"""Deterministic and quick statistical self-checks.

The stationarity residual is the central exactness check: for the
one-dimensional quadratic potential and a polynomial test function
``phi(x, v) = x^a v^b`` it evaluates ``int (v d_x phi + F phi) dpi`` with
quadrature only, where ``F`` is the jump part of the generator built from the
library's own rate, tilted density and jump map. Invariance of ``pi`` makes
the residual vanish.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from . import tilted
from .kernels import EpsilonSchedule, GaussianJumpKernel, jump_map
from .potential import QuadraticPotential
from .rng import RandomStream
from .special import LOG_SQRT_2PI, SQRT_2PI, log_theta, theta, tilted_cdf
from .thinning import BoundViolation, build_bound
from .tilted import EnvelopeViolation, ProposalKind, envelope_excess, gaussian_mode, sample_tilted

STATIONARITY_FUNCTIONS = ((2, 0), (0, 2), (1, 1), (4, 0), (0, 4), (2, 2))


def _gaussian_moment(k: int) -> float:
    """``E[G^k]`` for a standard Gaussian."""
    if k % 2:
        return 0.0
    return float(math.prod(range(k - 1, 0, -2))) if k else 1.0


def _half_line_moment(k: int) -> float:
    """``E[G^k; G > 0]``."""
    return 2.0 ** (0.5 * k - 1.0) * math.gamma(0.5 * (k + 1)) / math.sqrt(math.pi)


def _jump_term(kernel, eps: float, s: float, v: float, b: int) -> float:
    """``rate(s, v) int f_m(g) (v'^b - v^b) dg`` at the unit position ``x = s``."""
    xs = np.array([s])
    va = np.array([v])
    t = np.array([s])
    lam = kernel.rate(xs, va)
    if lam == 0.0:
        return 0.0
    m = eps * v * s
    # the jump map is affine in the excess z: v' = v + z * dv
    dv = float(jump_map(va, t, eps, 1.0)[0]) - v
    log_norm = LOG_SQRT_2PI + log_theta(m)
    vb = v**b

    def integrand(z):
        # tilted density f_m(z - m), written out for scalar speed
        return z * math.exp(-0.5 * (z - m) ** 2 - log_norm) * ((v + z * dv) ** b - vb)

    # integrate over the excess z = m + g; for m << 0 the density is a
    # spike of width ~1/|m| next to z = 0
    mode = m + gaussian_mode(m)
    width = 1.0 / max(1.0, -m)
    inner, _ = integrate.quad(
        integrand, 0.0, mode + 60.0 * width, points=[mode], epsabs=1e-13, epsrel=1e-10, limit=200
    )
    return lam * inner


def stationarity_residual(a: int, b: int, eps: float, v_max: float = 12.0) -> float:
    """``int (T + F) phi dpi`` for ``phi = x^a v^b``, 1D quadratic, constant ``eps``.

    ``T phi = v d_x phi``. ``F phi(x, v) = rate(x, v) int f_m(g) (phi(x, v') - phi(x, v)) dg``
    with ``v'`` the post-jump velocity for the tilted draw ``g``. For the
    quadratic the rate is ``|x|`` times the rate at ``sign(x)``, so the
    position integral reduces to half-line Gaussian moments. The velocity
    integrand changes over a width ``1/eps`` around ``v = 0``, so it is
    integrated adaptively on each side of zero rather than with a global
    Gauss-Hermite rule.
    """
    pot = QuadraticPotential(1.0, dim=1)
    kernel = GaussianJumpKernel(pot, EpsilonSchedule.constant(eps))
    transport = a * _gaussian_moment(a - 1) * _gaussian_moment(b + 1) if a else 0.0
    if b == 0:
        return transport
    jump = 0.0
    for s in (1.0, -1.0):
        # int_{s x > 0} x^a |x| dN(x)
        x_weight = s**a * _half_line_moment(a + 1)

        def outer(v, s=s):
            return _jump_term(kernel, eps, s, v, b) * math.exp(-0.5 * v * v) / SQRT_2PI

        acc = 0.0
        for lo, hi in ((-v_max, 0.0), (0.0, v_max)):
            part, _ = integrate.quad(outer, lo, hi, epsabs=1e-11, epsrel=1e-9, limit=200)
            acc += part
        jump += x_weight * acc
    return transport + jump


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, fn) -> CheckResult:
    try:
        ok, detail = fn()
    except (EnvelopeViolation, BoundViolation) as exc:
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def check_theta_identities() -> tuple[bool, str]:
    us = np.linspace(-8.0, 8.0, 161)
    worst = max(abs(theta(u) - theta(-u) - u) for u in us)
    below = all(theta(u) >= max(u, 0.0) for u in us)
    increasing = all(theta(u1) < theta(u2) for u1, u2 in zip(us[:-1], us[1:]))
    return worst < 1e-10 and below and increasing, f"max |theta(u)-theta(-u)-u| = {worst:.2e}"


def check_envelopes(points: int = 10_000) -> tuple[bool, str]:
    worst = 0.0
    for m in (-6.0, -3.0, -2.0, -1.5, -0.5, -0.1):
        for kind in (ProposalKind.GAMMA_SHIFTED, ProposalKind.EXPONENTIAL_SHIFTED, ProposalKind.RAYLEIGH_SHIFTED):
            worst = max(worst, envelope_excess(kind, m, np.linspace(-m, -m + 12.0 + abs(m), points)))
    for m in (0.0, 0.1, 1.0, 3.0, 6.0):
        for kind in (ProposalKind.MIXED_RAYLEIGH_GAUSSIAN, ProposalKind.GAUSSIAN_MODE):
            worst = max(worst, envelope_excess(kind, m, np.linspace(-m, -m + 12.0 + abs(m), points)))
    return worst <= 1.0 + 1e-12, f"max f_m/(C_m g_m) = {worst:.12f}"


def check_tilted_ks(ms=(-3.0, -0.5, 1.0), n: int = 20_000, level: float = 1e-3, seed: int = 7) -> tuple[bool, str]:
    pvals = []
    for i, m in enumerate(ms):
        rng = RandomStream(seed, i)
        ys = np.array([sample_tilted(m, rng).value for _ in range(n)])
        pvals.append(stats.kstest(ys, lambda y, m=m: tilted_cdf(m, y)).pvalue)
    return min(pvals) > level, "KS p-values " + ", ".join(f"m={m:g}: {p:.3f}" for m, p in zip(ms, pvals))


def check_stationarity(eps_values=(0.1, 1.0, 10.0), tol: float = 1e-6) -> tuple[bool, str]:
    worst = 0.0
    for eps in eps_values:
        for a, b in STATIONARITY_FUNCTIONS:
            worst = max(worst, abs(stationarity_residual(a, b, eps)))
    return worst < tol, f"max |residual| = {worst:.2e}"


def check_rate_domination(probes: int = 20_000, seed: int = 11) -> tuple[bool, str]:
    pot = QuadraticPotential(5.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kind in EpsilonSchedule.KINDS:
        kernel = GaussianJumpKernel(pot, EpsilonSchedule(kind, 0.7))
        for _ in range(probes // 3):
            x = rng.uniform(-5, 5, 2)
            v = rng.uniform(-5, 5, 2)
            t = rng.uniform(0, 3)
            bound = build_bound(kernel, x, v)
            worst = max(worst, kernel.rate(x + t * v, v) / bound.value(t))
    return worst <= 1.0 + 1e-9, f"max rate/bound = {worst:.6f}"


def run_validation(inject_envelope_bug: bool = False) -> list[CheckResult]:
    """Fast subset of the property suite; ``inject_envelope_bug`` shrinks every C_m by 10%."""
    saved = tilted._envelope_scale
    if inject_envelope_bug:
        tilted._envelope_scale = 0.9
    try:
        return [
            _check("theta identities", check_theta_identities),
            _check("envelope domination", check_envelopes),
            _check("tilted sampler KS", check_tilted_ks),
            _check("stationarity residual", check_stationarity),
            _check("rate bound domination", check_rate_domination),
        ]
    finally:
        tilted._envelope_scale = saved


def format_report(results, elapsed: float) -> str:
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}" for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed in {elapsed:.1f}s")
    return "\n".join(lines)


def timed_validation(inject_envelope_bug: bool = False) -> tuple[list[CheckResult], float]:
    start = time.perf_counter()
    results = run_validation(inject_envelope_bug)
    return results, time.perf_counter() - start
