"""Event times by thinning against a prior rate upper bound.

Along a free flight ``x + t v`` the true rate is dominated by

    bound(t) = hess_coeff * (t - t0)_+ + a + b * t**k,   k in {1, 2},

whose first arrival time is the minimum of three closed-form inversions, one
per term. A candidate at delay ``S`` is accepted with probability
``rate(x + S v, v) / bound(S)``; rejected candidates are ghost events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEVER = math.inf
# relative slack tolerated before a rate above its bound is reported
BOUND_SLACK = 1e-9


class BoundViolation(RuntimeError):
    """The true rate exceeded its prior upper bound at a candidate event."""


# not frozen: one bound is built per candidate event and frozen dataclass
# construction is noticeably slower; treat instances as read-only
@dataclass(slots=True)
class PriorRateBound:
    hess_coeff: float
    t0: float
    a: float
    b: float = 0.0
    k: int = 1

    def __post_init__(self):
        if min(self.hess_coeff, self.t0, self.a, self.b) < 0.0:
            raise ValueError(f"negative coefficient in {self}")
        if self.k not in (1, 2):
            raise ValueError(f"power k must be 1 or 2, got {self.k}")

    def value(self, t: float) -> float:
        s = t - self.t0
        out = self.a + self.b * (t if self.k == 1 else t * t)
        if s > 0.0:
            out += self.hess_coeff * s
        return out

    def integral(self, t: float) -> float:
        """Cumulative intensity ``int_0^t bound(s) ds``."""
        s = max(t - self.t0, 0.0)
        out = self.a * t
        # zero terms are skipped so that a huge t never produces 0 * inf
        if self.hess_coeff > 0.0:
            out += 0.5 * self.hess_coeff * s * s
        if self.b > 0.0:
            out += self.b * (t * t if self.k == 1 else t * t * t) / (self.k + 1)
        return out

    def delay(self, e1: float, e2: float, e3: float) -> float:
        """First arrival for the unit exponentials ``e1, e2, e3`` (one per term)."""
        s = NEVER
        if self.hess_coeff > 0.0:
            s = self.t0 + math.sqrt(2.0 * e1 / self.hess_coeff)
        if self.a > 0.0:
            s = min(s, e2 / self.a)
        if self.b > 0.0:
            s = min(s, ((self.k + 1) * e3 / self.b) ** (1.0 / (self.k + 1)))
        return s


@dataclass(frozen=True)
class BoundArrays:
    """Many prior rate bounds at once (one per ray), for vectorised sweeps."""

    hess_coeff: np.ndarray
    t0: np.ndarray
    a: np.ndarray
    b: np.ndarray
    k: int = 1

    def value(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.hess_coeff * np.maximum(t - self.t0, 0.0) + self.a + self.b * t**self.k

    def delay(self, e1, e2, e3) -> np.ndarray:
        with np.errstate(divide="ignore"):
            s1 = np.where(self.hess_coeff > 0.0, self.t0 + np.sqrt(2.0 * e1 / self.hess_coeff), NEVER)
            s2 = np.where(self.a > 0.0, e2 / self.a, NEVER)
            s3 = np.where(self.b > 0.0, ((self.k + 1) * e3 / self.b) ** (1.0 / (self.k + 1)), NEVER)
        return np.minimum(np.minimum(s1, s2), s3)

    def at(self, i: int) -> PriorRateBound:
        return PriorRateBound(
            float(self.hess_coeff[i]), float(self.t0[i]), float(self.a[i]), float(self.b[i]), self.k
        )


@dataclass(frozen=True, slots=True)
class CandidateEvent:
    delay: float
    bound_at_S: float


def sample_candidate(bound: PriorRateBound, rng) -> CandidateEvent:
    """First arrival of a Poisson process with intensity ``bound``.

    Returns a candidate with infinite delay when every coefficient is zero.
    """
    s = bound.delay(rng.exponential(), rng.exponential(), rng.exponential())
    return CandidateEvent(s, bound.value(s) if s < NEVER else 0.0)


def build_bound(kernel, x, v) -> PriorRateBound:
    """Prior rate bound for ``kernel`` along the ray from ``(x, v)``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    f = kernel.force.grad(x) if kernel.needs_force_for_bound else None
    return kernel.bound(v, f)


def checked_ratio(rate: float, bound_value: float) -> float:
    """``rate / bound_value``, raising :class:`BoundViolation` when above one."""
    if rate <= 0.0:
        return 0.0
    if rate > bound_value * (1.0 + BOUND_SLACK):
        raise BoundViolation(f"rate {rate!r} exceeds prior bound {bound_value!r}")
    return min(rate / bound_value, 1.0)


def domination_sweep(kernel, xs, vs, rng, slack: float = BOUND_SLACK) -> tuple[int, float]:
    """Candidate evaluations for many independent rays at once.

    For each row of ``xs, vs`` the bound is built, one candidate delay drawn
    from it, and the true rate evaluated there. Returns the number of bound
    violations and the largest ratio ``rate / bound`` seen. ``rng`` is a
    numpy ``Generator``.
    """
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(vs, dtype=float)
    n = len(xs)
    fs = kernel.force.grad_many(xs) if kernel.needs_force_for_bound else None
    bounds = kernel.bound_many(vs, fs)
    e = rng.exponential(size=(3, n))
    s = bounds.delay(e[0], e[1], e[2])
    finite = np.isfinite(s)
    ys = xs[finite] + s[finite, None] * vs[finite]
    rates = kernel.rate_many(ys, vs[finite])
    lam_bar = bounds.value(s[finite])
    ratio = np.where(rates > 0.0, rates / np.where(lam_bar > 0.0, lam_bar, 1.0), 0.0)
    ratio = np.where((rates > 0.0) & (lam_bar <= 0.0), np.inf, ratio)
    violations = int(np.count_nonzero(ratio > 1.0 + slack))
    return violations, float(ratio.max()) if ratio.size else 0.0


def accept_probability(kernel, x, v, candidate: CandidateEvent) -> float:
    """Acceptance probability of ``candidate`` drawn from the bound at ``(x, v)``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    rate = kernel.rate(x + candidate.delay * v, v)
    return checked_ratio(rate, candidate.bound_at_S)


def first_event_time(kernel, x, v, rng, max_candidates: int = 10**8) -> tuple[float, int]:
    """Thinned first jump time along the free flight from ``(x, v)``.

    Returns ``(time, candidates_used)``; ``time`` is infinite if the bound
    vanishes identically.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    t = 0.0
    bound = build_bound(kernel, x, v)
    for n in range(1, max_candidates + 1):
        cand = sample_candidate(bound, rng)
        if cand.delay == NEVER:
            return NEVER, n
        t += cand.delay
        y = x + t * v
        f = kernel.force.grad(y)
        ratio = checked_ratio(kernel.rate_from_force(y, v, f), cand.bound_at_S)
        if rng.uniform() < ratio:
            return t, n
        bound = kernel.bound(v, f)
    raise RuntimeError(f"no event after {max_candidates} candidates")
