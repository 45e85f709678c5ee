"""Velocity-jump mechanisms.

A mechanism owns one force field (the full ``grad U`` or one component of a
splitting) and provides four things to the event loop: the jump rate given the
force at the current point, a prior rate bound along the current ray, the
post-jump velocity, and whether building that bound needs a fresh force
evaluation.

The Gaussian family jumps at rate ``|xi|/eps * theta(eps v.T)`` with
``T = xi/|xi|`` and replaces the tangential velocity ``v.T`` by
``v.T - 2 eps/(1+eps^2) * (eps v.T + G)``, where ``G`` follows the tilted
density ``f_m`` at ``m = eps v.T``; the orthogonal velocity is untouched.
"""

from __future__ import annotations

import math
from operator import mul
from dataclasses import dataclass

import numpy as np

from .potential import PotentialModel, coordinate_components
from .special import INV_SQRT_2PI, theta, theta_array
from .thinning import BoundArrays, PriorRateBound
from .tilted import sample_excess

_ZERO_TOL = 1e-12


# list-based scalar helpers: several times faster than numpy calls on the
# short vectors handled once per candidate event
def _norm(a) -> float:
    return math.hypot(*a.tolist())


def _dot(a, b) -> float:
    return sum(map(mul, a.tolist(), b.tolist()))


def _is_zero_force(fnorm: float, x) -> bool:
    return fnorm <= _ZERO_TOL * (1.0 + _norm(x))


@dataclass(frozen=True)
class EpsilonSchedule:
    """Precision parameter ``eps(x)`` as a function of ``|grad U(x)|``.

    ``kind`` is ``"constant"`` (eps0), ``"proportional"`` (eps0 |grad U|) or
    ``"saturating"`` (eps0 / (1 + |grad U|)).
    """

    kind: str
    eps0: float

    KINDS = ("constant", "proportional", "saturating")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown epsilon schedule {self.kind!r}; expected one of {self.KINDS}")
        if not (self.eps0 > 0 and math.isfinite(self.eps0)):
            raise ValueError(f"eps0 must be positive and finite, got {self.eps0}")

    @classmethod
    def constant(cls, eps0: float) -> "EpsilonSchedule":
        return cls("constant", eps0)

    @classmethod
    def proportional_to_grad(cls, eps0: float) -> "EpsilonSchedule":
        return cls("proportional", eps0)

    @classmethod
    def saturating(cls, eps0: float) -> "EpsilonSchedule":
        return cls("saturating", eps0)

    def __call__(self, gnorm: float) -> float:
        if self.kind == "constant":
            return self.eps0
        if self.kind == "proportional":
            return self.eps0 * gnorm
        return self.eps0 / (1.0 + gnorm)


def rho_t(eps: float) -> float:
    """Tangential memory ``(1 - eps^2)/(1 + eps^2)`` of the proposal kernel."""
    return (1.0 - eps * eps) / (1.0 + eps * eps)


def proposal_intensity(eps: float) -> float:
    """Proposal intensity ``(1 + eps^2)/eps^2``."""
    return (1.0 + eps * eps) / (eps * eps)


def tangential_proposal_density(eps: float, vt: float, vt_new: float) -> float:
    """Density of the uncorrected tangential proposal ``vt -> vt_new``.

    The proposal is ``vt_new = rho vt + sqrt(1 - rho^2) G``.
    """
    rho = rho_t(eps)
    var = 1.0 - rho * rho
    d = vt_new - rho * vt
    return math.exp(-0.5 * d * d / var) / math.sqrt(2.0 * math.pi * var)


def jump_map(v, t, eps: float, excess: float) -> np.ndarray:
    """Post-jump velocity for unit tangent ``t`` and tilted excess ``m + G``."""
    return v - (2.0 * eps / (1.0 + eps * eps) * excess) * t


class GaussianJumpKernel:
    """Corrected Gaussian velocity-jump mechanism for one force field.

    Args:
        force: the field ``xi`` (a :class:`PotentialModel` or force component).
        schedule: the precision parameter ``eps(x)``.
        label: name used in event logs.
    """

    name = "gaussian"

    def __init__(self, force: PotentialModel, schedule: EpsilonSchedule, label: str | None = None):
        self.force = force
        self.schedule = schedule
        self.label = label or force.name
        self.needs_force_for_bound = force.hessian_bound is not None

    def epsilon(self, fnorm: float) -> float:
        return self.schedule(fnorm)

    def rate_from_force(self, x, v, f) -> float:
        n = _norm(f)
        if _is_zero_force(n, x):
            return 0.0
        eps = self.schedule(n)
        return n / eps * theta(eps * _dot(v, f) / n)

    def rate(self, x, v) -> float:
        return self.rate_from_force(x, v, self.force.grad(x))

    def jump_from_force(self, x, v, f, rng) -> np.ndarray:
        n = _norm(f)
        if _is_zero_force(n, x):
            raise ValueError("no jump can occur where the force vanishes")
        eps = self.schedule(n)
        t = f / n
        return jump_map(v, t, eps, sample_excess(eps * _dot(v, t), rng))

    def post_jump_velocity(self, x, v, rng) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.jump_from_force(x, np.asarray(v, dtype=float), self.force.grad(x), rng)

    def bound(self, v, f=None) -> PriorRateBound:
        """Prior rate bound along ``x + t v`` given ``f = xi(x)``.

        With a Hessian bound ``M`` the ray estimates
        ``v.xi(x+tv) <= v.xi(x) + M|v|^2 t`` and ``|xi(x+tv)| <= |xi(x)| + M|v| t``
        are combined with ``theta(u) <= u_+ + 1/sqrt(2 pi)``. With only a
        sup bound ``L`` the bound is constant in time and ``f`` is not used.
        """
        vn = _norm(v)
        c = INV_SQRT_2PI / self.schedule.eps0
        kind = self.schedule.kind
        m_bound = self.force.hessian_bound
        if m_bound is None:
            lsup = self.force.grad_sup_bound
            if kind == "constant":
                grad_part = lsup * c
            elif kind == "proportional":
                grad_part = c
            else:
                grad_part = (lsup + lsup * lsup) * c
            return PriorRateBound(0.0, 0.0, lsup * vn + grad_part)

        g0 = _dot(v, f)
        n0 = _norm(f)
        hess = m_bound * vn * vn
        if g0 >= 0.0:
            pos, t0 = g0, 0.0
        else:
            pos, t0 = 0.0, (-g0 / hess if hess > 0.0 else 0.0)
        if kind == "constant":
            return PriorRateBound(hess, t0, pos + n0 * c, m_bound * vn * c, 1)
        if kind == "proportional":
            return PriorRateBound(hess, t0, pos + c, 0.0, 1)
        # n(t)(1 + n(t)) with n(t) = n0 + M|v|t, and t <= (1 + t^2)/2 for the linear term
        lin = (1.0 + 2.0 * n0) * m_bound * vn
        quad = (m_bound * vn) ** 2
        return PriorRateBound(hess, t0, pos + c * (n0 + n0 * n0 + 0.5 * lin), c * (quad + 0.5 * lin), 2)

    def rate_many(self, xs, vs, fs=None) -> np.ndarray:
        """Rates at the rows of ``xs, vs``; mirrors :meth:`rate_from_force`."""
        xs = np.asarray(xs, dtype=float)
        vs = np.asarray(vs, dtype=float)
        fs = self.force.grad_many(xs) if fs is None else fs
        n = np.sqrt((fs * fs).sum(axis=1))
        zero = n <= _ZERO_TOL * (1.0 + np.sqrt((xs * xs).sum(axis=1)))
        ns = np.where(zero, 1.0, n)
        eps = np.broadcast_to(self.schedule(ns), ns.shape)
        out = ns / eps * theta_array(eps * (vs * fs).sum(axis=1) / ns)
        return np.where(zero, 0.0, out)

    def bound_many(self, vs, fs=None) -> BoundArrays:
        """Vectorised :meth:`bound` over the rows of ``vs`` (and ``fs``)."""
        vs = np.asarray(vs, dtype=float)
        vn = np.sqrt((vs * vs).sum(axis=1))
        c = INV_SQRT_2PI / self.schedule.eps0
        kind = self.schedule.kind
        m_bound = self.force.hessian_bound
        zeros = np.zeros_like(vn)
        if m_bound is None:
            lsup = self.force.grad_sup_bound
            grad_part = {"constant": lsup * c, "proportional": c}.get(kind, (lsup + lsup * lsup) * c)
            return BoundArrays(zeros, zeros, lsup * vn + grad_part, zeros)
        g0 = (vs * fs).sum(axis=1)
        n0 = np.sqrt((fs * fs).sum(axis=1))
        hess = m_bound * vn * vn
        pos = np.maximum(g0, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = np.where((g0 < 0.0) & (hess > 0.0), -g0 / hess, 0.0)
        if kind == "constant":
            return BoundArrays(hess, t0, pos + n0 * c, m_bound * vn * c, 1)
        if kind == "proportional":
            return BoundArrays(hess, t0, pos + c, zeros, 1)
        lin = (1.0 + 2.0 * n0) * m_bound * vn
        quad = (m_bound * vn) ** 2
        return BoundArrays(hess, t0, pos + c * (n0 + n0 * n0 + 0.5 * lin), c * (quad + 0.5 * lin), 2)

    def __repr__(self) -> str:
        return f"GaussianJumpKernel({self.label!r}, {self.schedule})"


class BouncyKernel:
    """Bouncy particle mechanism: rate ``(v.xi)_+``, reflection across ``xi^perp``."""

    name = "bouncy"

    def __init__(self, force: PotentialModel, label: str | None = None):
        self.force = force
        self.label = label or force.name
        self.needs_force_for_bound = force.hessian_bound is not None

    def rate_from_force(self, x, v, f) -> float:
        g = _dot(v, f)
        return g if g > 0.0 else 0.0

    def rate(self, x, v) -> float:
        return self.rate_from_force(x, v, self.force.grad(x))

    def jump_from_force(self, x, v, f, rng=None) -> np.ndarray:
        n2 = _dot(f, f)
        if n2 == 0.0:
            return np.array(v, dtype=float)
        return v - (2.0 * _dot(v, f) / n2) * f

    def post_jump_velocity(self, x, v, rng=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.jump_from_force(x, np.asarray(v, dtype=float), self.force.grad(x))

    def bound(self, v, f=None) -> PriorRateBound:
        vn = _norm(v)
        m_bound = self.force.hessian_bound
        if m_bound is None:
            return PriorRateBound(0.0, 0.0, self.force.grad_sup_bound * vn)
        g0 = _dot(v, f)
        hess = m_bound * vn * vn
        if g0 >= 0.0:
            return PriorRateBound(hess, 0.0, g0)
        return PriorRateBound(hess, -g0 / hess if hess > 0.0 else 0.0, 0.0)

    def __repr__(self) -> str:
        return f"BouncyKernel({self.label!r})"


class ZigZagCoordinateKernel:
    """Flip of coordinate ``i`` at rate ``(v_i d_i U(x))_+``.

    ``force`` is the coordinate field ``d_i U(x) e_i``.
    """

    name = "zigzag"

    def __init__(self, force: PotentialModel, index: int, label: str | None = None):
        self.force = force
        self.index = index
        self.label = label or force.name
        self.needs_force_for_bound = force.hessian_bound is not None

    def rate_from_force(self, x, v, f) -> float:
        g = float(v[self.index] * f[self.index])
        return g if g > 0.0 else 0.0

    def rate(self, x, v) -> float:
        return self.rate_from_force(x, v, self.force.grad(x))

    def jump_from_force(self, x, v, f, rng=None) -> np.ndarray:
        out = np.array(v, dtype=float)
        out[self.index] = -out[self.index]
        return out

    def post_jump_velocity(self, x, v, rng=None) -> np.ndarray:
        return self.jump_from_force(x, v, None)

    def bound(self, v, f=None) -> PriorRateBound:
        vi = abs(float(v[self.index]))
        m_bound = self.force.hessian_bound
        if m_bound is None:
            return PriorRateBound(0.0, 0.0, vi * self.force.grad_sup_bound)
        # |d_i U(x+tv) - d_i U(x)| <= M |v| t
        g0 = float(v[self.index] * f[self.index])
        hess = vi * m_bound * _norm(v)
        if g0 >= 0.0:
            return PriorRateBound(hess, 0.0, g0)
        return PriorRateBound(hess, -g0 / hess if hess > 0.0 else 0.0, 0.0)

    def __repr__(self) -> str:
        return f"ZigZagCoordinateKernel({self.label!r}, index={self.index})"


def gaussian_kernel(force: PotentialModel, schedule: EpsilonSchedule) -> GaussianJumpKernel:
    return GaussianJumpKernel(force, schedule)


def bouncy_kernel(force: PotentialModel) -> BouncyKernel:
    return BouncyKernel(force)


def zigzag_kernels(potential: PotentialModel) -> list[ZigZagCoordinateKernel]:
    """One coordinate-flip mechanism per dimension."""
    return [
        ZigZagCoordinateKernel(component, i)
        for i, component in enumerate(coordinate_components(potential))
    ]


def rate(kernel, x, v) -> float:
    """Jump rate of ``kernel`` at ``(x, v)``."""
    return kernel.rate(np.asarray(x, dtype=float), np.asarray(v, dtype=float))


def post_jump_velocity(kernel, x, v, rng) -> np.ndarray:
    """Velocity right after a jump of ``kernel`` fired at ``(x, v)``."""
    return kernel.post_jump_velocity(np.asarray(x, dtype=float), np.asarray(v, dtype=float), rng)
