import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gvjump.kernels import (
    BouncyKernel,
    EpsilonSchedule,
    GaussianJumpKernel,
    jump_map,
    post_jump_velocity,
    proposal_intensity,
    rate,
    rho_t,
    tangential_proposal_density,
    zigzag_kernels,
)
from gvjump.potential import PotentialModel, QuadraticPotential
from gvjump.rng import RandomStream
from gvjump.special import INV_SQRT_2PI, positive_part_moment, theta, tilted_moment

vec2 = arrays(float, 2, elements=st.floats(-5, 5))
SCHEDULES = [EpsilonSchedule(k, e) for k in EpsilonSchedule.KINDS for e in (0.1, 1.0, 10.0)]


def _pot1():
    return QuadraticPotential(1.0, dim=1)


def test_schedule_validation():
    with pytest.raises(ValueError):
        EpsilonSchedule("bogus", 1.0)
    with pytest.raises(ValueError):
        EpsilonSchedule.constant(0.0)
    assert EpsilonSchedule.constant(2.0)(7.0) == 2.0
    assert EpsilonSchedule.proportional_to_grad(2.0)(3.0) == 6.0
    assert EpsilonSchedule.saturating(2.0)(3.0) == 0.5


def test_rate_zero_force():
    zero = PotentialModel(2, lambda x: np.zeros(2), hessian_bound=0.0)
    k = GaussianJumpKernel(zero, EpsilonSchedule.constant(1.0))
    assert rate(k, [1.0, 2.0], [3.0, 4.0]) == 0.0


def test_rate_example_1d():
    k = GaussianJumpKernel(_pot1(), EpsilonSchedule.constant(1.0))
    assert rate(k, [1.0], [0.0]) == pytest.approx(INV_SQRT_2PI, rel=1e-15)


@settings(max_examples=300, deadline=None)
@given(vec2, vec2, st.sampled_from(SCHEDULES))
def test_rate_below_simple_bound(x, v, sched):
    pot = QuadraticPotential(5.0)
    k = GaussianJumpKernel(pot, sched)
    f = pot._grad(x)
    n = np.linalg.norm(f)
    if n < 1e-9:
        return
    eps = sched(n)
    assert k.rate(x, v) <= max(v @ f, 0.0) + n / (math.sqrt(2 * math.pi) * eps) + 1e-9 * (1 + n / eps)


@settings(max_examples=300, deadline=None)
@given(vec2, vec2, st.sampled_from(SCHEDULES))
def test_rate_averaging_identity(x, v, sched):
    # rate(x, v) - rate(x, v - 2 (v.T) T) = v . grad U
    pot = QuadraticPotential(5.0)
    k = GaussianJumpKernel(pot, sched)
    f = pot._grad(x)
    n = np.linalg.norm(f)
    if n < 1e-6:
        return
    t = f / n
    vr = v - 2 * (v @ t) * t
    diff = k.rate(x, v) - k.rate(x, vr)
    assert diff == pytest.approx(v @ f, abs=1e-9 * (1 + k.rate(x, v)))


def test_rate_many_matches_scalar(nprng):
    pot = QuadraticPotential(5.0)
    xs = nprng.uniform(-5, 5, (500, 2))
    vs = nprng.uniform(-5, 5, (500, 2))
    xs[0] = 0.0
    for sched in SCHEDULES:
        k = GaussianJumpKernel(pot, sched)
        ref = np.array([k.rate(x, v) for x, v in zip(xs, vs)])
        assert np.allclose(k.rate_many(xs, vs), ref, rtol=1e-12, atol=0)


def test_full_resampling_at_unit_eps():
    pot = QuadraticPotential(1.0)
    x = np.array([0.6, 0.8])
    v = np.array([0.3, -1.2])
    t = x.copy()
    # eps = 1: v'.T = v.T - (m + Y) = -Y with m = v.T
    for excess in (0.1, 0.7, 3.0):
        vn = jump_map(v, t, 1.0, excess)
        assert vn @ t == pytest.approx(v @ t - excess, abs=1e-15)
    rng = RandomStream(0, 0)
    k = GaussianJumpKernel(pot, EpsilonSchedule.constant(1.0))
    ys = np.array([-(post_jump_velocity(k, x, v, rng) @ t) for _ in range(20_000)])
    assert abs(ys.mean() - tilted_moment(v @ t, 1)) < 4 * ys.std() / math.sqrt(len(ys))


def test_bounce_limit_of_large_eps():
    pot = QuadraticPotential(1.0)
    k = GaussianJumpKernel(pot, EpsilonSchedule.constant(1e8))
    rng = RandomStream(1, 0)
    x = np.array([1.0, 0.0])
    # jumps only fire with v.T > 0 in this limit (the rate of the other side vanishes)
    for v in (np.array([0.5, 0.3]), np.array([2.0, -1.0])):
        vn = post_jump_velocity(k, x, v, rng)
        assert vn[0] == pytest.approx(-v[0], abs=1e-6)
        assert vn[1] == v[1]
    assert k.rate(x, np.array([-0.2, 1.0])) == 0.0


@settings(max_examples=100, deadline=None)
@given(vec2, vec2, st.sampled_from(SCHEDULES), st.integers(0, 1000))
def test_orthogonal_part_unchanged(x, v, sched, seed):
    pot = QuadraticPotential(5.0)
    f = pot._grad(x)
    n = np.linalg.norm(f)
    if n < 1e-6:
        return
    t = f / n
    k = GaussianJumpKernel(pot, sched)
    vn = k.post_jump_velocity(x, v, RandomStream(seed, 0))
    assert np.allclose(vn - (vn @ t) * t, v - (v @ t) * t, atol=1e-12 * (1 + np.abs(v).max()))


def test_jump_at_zero_force_is_an_error():
    k = GaussianJumpKernel(QuadraticPotential(1.0), EpsilonSchedule.constant(1.0))
    with pytest.raises(ValueError):
        k.post_jump_velocity(np.zeros(2), np.ones(2), RandomStream(0, 0))


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0, 3.0])
def test_tangential_proposal_reversible(eps):
    grid = np.linspace(-4, 4, 41)
    for a in grid:
        for b in grid:
            lhs = tangential_proposal_density(eps, a, b) * math.exp(-0.5 * a * a)
            rhs = tangential_proposal_density(eps, b, a) * math.exp(-0.5 * b * b)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


def test_proposal_parameters():
    assert rho_t(1.0) == 0.0
    assert proposal_intensity(1.0) == 2.0
    assert rho_t(1e-4) == pytest.approx(1.0)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_small_eps_drift(eps):
    # F phi for phi(v) = v.T equals -2 |grad U| E[(m + G)_+^2] / (1 + eps^2); leading term -|grad U|
    x = np.array([1.2])
    k = GaussianJumpKernel(_pot1(), EpsilonSchedule.constant(eps))
    for v in (-1.5, 0.0, 0.8):
        m = eps * v
        lam = k.rate(x, np.array([v]))
        drift = lam * (-2 * eps / (1 + eps * eps)) * (m + tilted_moment(m, 1))
        assert drift == pytest.approx(-2 * 1.2 / (1 + eps * eps) * positive_part_moment(m, 2), rel=1e-8)
        # first-order term: E[(m + G)_+^2] = 1/2 + 2 m / sqrt(2 pi) + O(m^2)
        assert abs(drift + 1.2) <= 1.2 * 2.0 * (1.0 + abs(v)) * eps


def test_small_eps_drift_slope():
    errs = []
    x = np.array([1.2])
    for eps in (1e-1, 1e-2, 1e-3):
        k = GaussianJumpKernel(_pot1(), EpsilonSchedule.constant(eps))
        m = eps * 0.8
        lam = k.rate(x, np.array([0.8]))
        errs.append(abs(lam * (-2 * eps / (1 + eps * eps)) * (m + tilted_moment(m, 1)) + 1.2))
    slope = np.polyfit(np.log([1e-1, 1e-2, 1e-3]), np.log(errs), 1)[0]
    assert slope >= 0.9


def test_bouncy_examples():
    one = PotentialModel(1, lambda x: np.ones(1), hessian_bound=0.0)
    k = BouncyKernel(one)
    assert rate(k, [0.0], [2.0]) == 2.0
    assert np.array_equal(post_jump_velocity(k, [0.0], [2.0], None), [-2.0])
    pot = QuadraticPotential(1.0)
    kb = BouncyKernel(pot)
    assert rate(kb, [1.0, 0.0], [0.0, 3.0]) == 0.0


@settings(max_examples=200, deadline=None)
@given(vec2, vec2)
def test_bouncy_isometry(x, v):
    kb = BouncyKernel(QuadraticPotential(5.0))
    assert np.linalg.norm(kb.post_jump_velocity(x, v)) == pytest.approx(np.linalg.norm(v), rel=1e-12, abs=1e-12)


def test_zigzag_examples():
    (k,) = zigzag_kernels(_pot1())
    assert rate(k, [1.0], [1.0]) == 1.0
    assert np.array_equal(post_jump_velocity(k, [1.0], [1.0], None), [-1.0])
    field = PotentialModel(2, lambda x: np.array([-1.0, 3.0]), hessian_bound=0.0)
    ks = zigzag_kernels(field)
    assert [rate(z, [0.0, 0.0], [1.0, 1.0]) for z in ks] == [0.0, 3.0]
    v = np.array([1.0, -2.0])
    assert np.linalg.norm(ks[1].post_jump_velocity(None, v)) == np.linalg.norm(v)
