"""Post-processing: batch-means error bars, the conditional-wedge bias, the
explicit L2 convergence rate, and ensemble decay checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import REFRESH, Trajectory, cumulative_integral
from .special import bessel_k_scaled

MIN_BATCHES = 8


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    batches: int

    def __post_init__(self):
        if not self.std_error >= 0.0:
            raise ValueError(f"std_error must be non-negative, got {self.std_error}")
        if self.batches < MIN_BATCHES:
            raise ValueError(f"need at least {MIN_BATCHES} batches, got {self.batches}")

    def z_score(self, target: float) -> float:
        diff = self.value - target
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error

    def within(self, target: float, n_se: float) -> bool:
        return abs(self.z_score(target)) <= n_se


def _from_batch_values(values: np.ndarray) -> EstimateWithError:
    nb = len(values)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(nb))
    return EstimateWithError(mean, se, nb)


def batch_means(samples, batches: int = 32) -> EstimateWithError:
    """Mean of a correlated series with its batch-means standard error.

    Trailing samples that do not fill a whole batch are dropped.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if batches < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} batches, got {batches}")
    size = len(x) // batches
    if size < 1:
        raise ValueError(f"{len(x)} samples cannot fill {batches} batches")
    means = x[: size * batches].reshape(batches, size).mean(axis=1)
    return _from_batch_values(means)


def trajectory_batch_means(traj: Trajectory, kind: str, batches: int = 32, burn_in: float = 0.0) -> EstimateWithError:
    """Time average of a quadratic observable over equal time windows.

    Each batch value is the exact integral of the observable over its window
    divided by the window length.
    """
    if batches < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} batches, got {batches}")
    t0 = traj.initial.t + burn_in
    if not t0 < traj.final.t:
        raise ValueError("burn-in covers the whole trajectory")
    edges = np.linspace(t0, traj.final.t, batches + 1)
    cum = cumulative_integral(traj, kind, edges)
    return _from_batch_values(np.diff(cum) / np.diff(edges))


def iid_std_error(samples) -> float:
    x = np.asarray(samples, dtype=float)
    return float(x.std(ddof=1) / math.sqrt(len(x)))


def wedge_conditioned_bias(c: float) -> float:
    """``E(|X|^2 | X1 V2 - X2 V1 = c)`` for independent standard normal planar ``X, V``.

    Conditioning on the wedge reweights the law of ``r = |X|^2`` by
    ``exp(-c^2/(2r))/sqrt(r)``; the two resulting integrals are Bessel
    functions of order 3/2 and 1/2, so the value is ``c K_{3/2}(c)/K_{1/2}(c)``.
    Both are computed by quadrature; the exponential scaling cancels in the ratio.
    """
    if not c > 0:
        raise ValueError(f"wedge value c must be positive, got {c}")
    return c * bessel_k_scaled(1.5, c) / bessel_k_scaled(0.5, c)


def wedge_bias_monte_carlo(
    c: float, pairs: int, halfwidth: float = 0.01, seed: int = 0, chunk: int = 1_000_000
) -> tuple[EstimateWithError, int]:
    """Rejection estimate of ``E(|X|^2 | |X wedge V - c| < halfwidth)``.

    Returns the estimate (iid standard error, 8 nominal batches) and the
    number of accepted pairs.
    """
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    kept = 0
    done = 0
    while done < pairs:
        n = min(chunk, pairs - done)
        z = rng.standard_normal((n, 4))
        w = z[:, 0] * z[:, 3] - z[:, 1] * z[:, 2]
        r = (z[:, 0] ** 2 + z[:, 1] ** 2)[np.abs(w - c) < halfwidth]
        total += r.sum()
        total_sq += (r * r).sum()
        kept += len(r)
        done += n
    if kept < 2:
        raise ValueError("too few accepted pairs; increase pairs or halfwidth")
    mean = total / kept
    var = max(total_sq / kept - mean * mean, 0.0) * kept / (kept - 1)
    return EstimateWithError(mean, math.sqrt(var / kept), MIN_BATCHES), kept


@dataclass(frozen=True)
class RateInputs:
    """Constants entering the explicit L2 convergence rate.

    Args:
        d: dimension.
        c_P: Poincare constant of the position marginal.
        C1, C2: Hessian lower-bound constants of the potential.
        eta_lower, eta_upper: refresh rate bounds ``eta_lower < eta(x) < eta_upper (1 + |grad U(x)|)``.
    """

    d: int
    c_P: float
    C1: float = 0.0
    C2: float = 0.0
    eta_lower: float = 1.0
    eta_upper: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")
        if not self.c_P > 0:
            raise ValueError(f"c_P must be positive, got {self.c_P}")
        if self.C1 < 0 or self.C2 < 0:
            raise ValueError("C1 and C2 must be non-negative")
        if not self.eta_lower > 0:
            raise ValueError(f"eta_lower must be positive, got {self.eta_lower}")
        if self.eta_upper < self.eta_lower:
            raise ValueError("eta_upper must be at least eta_lower")


def kappa_bound(inputs: RateInputs) -> float:
    """Explicit exponential rate ``kappa`` of L2 convergence with refreshment.

    ``1/kappa = 6/eta_lower * (1 + (1 + C1/(2 c_P)) (1 + 4 C2 + 16 c_P^2)
    (eta_upper/sqrt(d) + 5 sqrt(1 + 2/d^2) + 4/d)^2 / c_P^2)``. The rate does
    not depend on the precision parameter of the jump kernel.
    """
    d = inputs.d
    c = inputs.c_P
    speed = inputs.eta_upper / math.sqrt(d) + 5.0 * math.sqrt(1.0 + 2.0 / (d * d)) + 4.0 / d
    inner = (1.0 + inputs.C1 / (2.0 * c)) * (1.0 + 4.0 * inputs.C2 + 16.0 * c * c) * speed * speed / (c * c)
    return inputs.eta_lower / (6.0 * (1.0 + inner))


@dataclass(frozen=True)
class DecayReport:
    times: np.ndarray
    deviation: np.ndarray
    std_error: np.ndarray
    envelope: np.ndarray
    fitted_rate: float
    kappa: Optional[float]
    monotone: bool
    decayed: bool

    @property
    def rate_exceeds_kappa(self) -> Optional[bool]:
        return None if self.kappa is None else self.fitted_rate >= self.kappa


def ensemble_deviation(
    trajectories: Sequence[Trajectory], f: Callable, times, target: float
) -> tuple[np.ndarray, np.ndarray]:
    """``E f(X_t, V_t) - target`` over the ensemble, with its standard error."""
    times = np.asarray(times, dtype=float)
    vals = np.empty((len(trajectories), len(times)))
    for r, traj in enumerate(trajectories):
        vals[r] = f(traj.positions_at(times), traj.velocities_at(times))
    mean = vals.mean(axis=0) - target
    se = vals.std(axis=0, ddof=1) / math.sqrt(len(trajectories))
    return mean, se


def l2_decay_check(
    trajectories: Sequence[Trajectory],
    f: Callable,
    times,
    target: float,
    inputs: Optional[RateInputs] = None,
    windows: int = 10,
    noise_se: float = 3.0,
    min_replicas: int = 100,
) -> DecayReport:
    """Fit the exponential decay of ``|E f(X_t, V_t) - target|`` over an ensemble.

    The deviation may oscillate, so decay is judged on its envelope: the
    maximum over consecutive time windows. The envelope counts as monotone if
    no window exceeds its predecessor by more than ``noise_se`` standard
    errors. The rate is fitted log-linearly on windows whose envelope stands
    above the noise, and doubled so that it refers to the squared deviation,
    the quantity the explicit rate ``kappa`` controls.

    ``f`` takes position and velocity arrays of shape ``(n, d)`` and returns
    ``n`` values.
    """
    if len(trajectories) < min_replicas:
        raise ValueError(f"ensemble of {len(trajectories)} replicas is too small (need {min_replicas})")
    if not any(t.count(REFRESH) for t in trajectories):
        raise ValueError("no refreshment events in the ensemble; the decay check needs refresh")
    times = np.asarray(times, dtype=float)
    dev, se = ensemble_deviation(trajectories, f, times, target)
    groups = np.array_split(np.arange(len(times)), windows)
    envelope = np.array([np.abs(dev[g]).max() for g in groups])
    noise = np.array([se[g].max() for g in groups])
    mids = np.array([times[g].mean() for g in groups])

    monotone = bool(np.all(np.diff(envelope) <= noise_se * np.maximum(noise[1:], noise[:-1])))
    signal = envelope > noise_se * noise
    if not signal[0]:
        # nothing above the noise from the start: constant observable or already stationary
        return DecayReport(times, dev, se, envelope, math.inf, _kappa(inputs), monotone, True)
    # fit on the leading run of windows that stand above the noise
    last = int(np.argmin(signal)) if not signal.all() else len(signal)
    decayed = bool(envelope[-1] < 0.5 * envelope[0])
    if last < 2:
        rate = math.inf if decayed else 0.0
    else:
        slope = np.polyfit(mids[:last], np.log(envelope[:last]), 1)[0]
        rate = float(-2.0 * slope)
    return DecayReport(times, dev, se, envelope, rate, _kappa(inputs), monotone, decayed)


def _kappa(inputs: Optional[RateInputs]) -> Optional[float]:
    return None if inputs is None else kappa_bound(inputs)


def replica_summary(values) -> dict:
    """Box-plot statistics of per-replica values."""
    x = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return {
        "n": int(len(x)),
        "mean": float(x.mean()),
        "std": float(x.std(ddof=1)) if len(x) > 1 else 0.0,
        "min": float(x.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(x.max()),
    }


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])
