"""Event loop for superposed velocity-jump mechanisms.

Each jump mechanism runs its own thinned Poisson clock; refreshment is one
more clock. The earliest clock fires, the position is advanced exactly along
the straight flight, and the candidate is accepted or recorded as a ghost.
Whenever the velocity changes every clock is re-armed on the new ray; after a
ghost only the clock that fired is re-armed, which is valid because
independent Poisson clocks can be thinned separately.

A trajectory is stored as its event log. Positions at arbitrary times and
time integrals of quadratic observables are computed exactly from it.
"""

from __future__ import annotations

import math
from array import array
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .refresh import RefreshSpec, apply_refresh
from .rng import RandomStream
from .thinning import checked_ratio

GHOST, JUMP, REFRESH = 0, 1, 2
KIND_NAMES = {GHOST: "ghost", JUMP: "jump", REFRESH: "refresh"}
REFRESH_COMPONENT = -1
DEFAULT_EVENT_CAP = 10**8


class EventCapExceeded(RuntimeError):
    """More candidate events than the configured cap; the rate may be exploding."""


@dataclass(frozen=True)
class KineticState:
    t: float
    x: np.ndarray
    v: np.ndarray

    @classmethod
    def at(cls, x, v, t: float = 0.0) -> "KineticState":
        x = np.array(x, dtype=float)
        v = np.array(v, dtype=float)
        if x.shape != v.shape or x.ndim != 1:
            raise ValueError(f"position and velocity shapes differ: {x.shape} vs {v.shape}")
        return cls(float(t), x, v)


@dataclass
class SimConfig:
    """What to simulate and when to stop.

    Either ``horizon`` or ``force_budget`` (total force evaluations over all
    mechanisms, ghosts included) must be given; the run stops at whichever
    comes first.
    """

    kernels: Sequence
    horizon: Optional[float] = None
    refresh: Optional[RefreshSpec] = None
    seed: int = 0
    stream: int = 0
    force_budget: Optional[int] = None
    event_cap: int = DEFAULT_EVENT_CAP
    log_ghosts: bool = False

    def __post_init__(self):
        if not self.kernels:
            raise ValueError("at least one jump mechanism is required")
        if self.horizon is None and self.force_budget is None:
            raise ValueError("give a horizon, a force budget, or both")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.force_budget is not None and self.force_budget < 1:
            raise ValueError(f"force budget must be positive, got {self.force_budget}")


@dataclass(frozen=True)
class Trajectory:
    initial: KineticState
    final: KineticState
    times: np.ndarray
    kinds: np.ndarray
    components: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    force_evaluations: tuple
    labels: tuple
    candidates: int = 0

    @property
    def horizon(self) -> float:
        return self.final.t - self.initial.t

    @property
    def dim(self) -> int:
        return len(self.initial.x)

    @property
    def n_events(self) -> int:
        return len(self.times)

    def count(self, kind: int) -> int:
        return int(np.count_nonzero(self.kinds == kind))

    def segments(self):
        """Constant-velocity pieces as ``(start_times, x_start, v, durations)``."""
        keep = self.kinds != GHOST
        starts = np.concatenate(([self.initial.t], self.times[keep]))
        xs = np.vstack((self.initial.x, self.positions[keep]))
        vs = np.vstack((self.initial.v, self.velocities[keep]))
        durations = np.diff(np.append(starts, self.final.t))
        return starts, xs, vs, durations

    def positions_at(self, times) -> np.ndarray:
        """Exact positions at the requested times (within the simulated span)."""
        times = np.asarray(times, dtype=float)
        starts, xs, vs, _ = self.segments()
        k = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(starts) - 1)
        return xs[k] + (times - starts[k])[..., None] * vs[k]

    def velocities_at(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        starts, _, vs, _ = self.segments()
        k = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(starts) - 1)
        return vs[k]


class _Log:
    __slots__ = ("t", "kind", "comp", "x", "v")

    def __init__(self):
        self.t = array("d")
        self.kind = array("b")
        self.comp = array("i")
        self.x = array("d")
        self.v = array("d")

    def add(self, t, kind, comp, x, v):
        self.t.append(t)
        self.kind.append(kind)
        self.comp.append(comp)
        self.x.extend(x.tolist())
        self.v.extend(v.tolist())


def simulate(config: SimConfig, initial: KineticState) -> Trajectory:
    """Simulate the superposed process exactly from ``initial``.

    Raises:
        EventCapExceeded: more than ``config.event_cap`` candidate events.
        BoundViolation: a rate exceeded its prior bound (a wrong potential bound).
    """
    rng = RandomStream(config.seed, config.stream)
    mechs = list(config.kernels)
    nm = len(mechs)
    d = len(initial.x)
    t = float(initial.t)
    x = np.array(initial.x, dtype=float)
    v = np.array(initial.v, dtype=float)
    t_end = math.inf if config.horizon is None else t + config.horizon
    budget = math.inf if config.force_budget is None else config.force_budget
    refresh = config.refresh
    log = _Log()
    log_ghosts = config.log_ghosts

    counts = [0] * nm
    bounds = [None] * nm
    anchor = [t] * nm
    nxt = [math.inf] * nm
    exp = rng.exponential

    def arm(i, f):
        b = mechs[i].bound(v, f)
        bounds[i] = b
        anchor[i] = t
        nxt[i] = t + b.delay(exp(), exp(), exp())

    def rearm_all(skip=-1, f_skip=None):
        """Re-arm every clock; returns the number of force evaluations spent."""
        spent = 0
        for j in range(nm):
            if j == skip:
                arm(j, f_skip)
                continue
            m = mechs[j]
            if m.needs_force_for_bound:
                counts[j] += 1
                spent += 1
                arm(j, m.force.grad(x))
            else:
                arm(j, None)
        return spent

    total = rearm_all()
    next_ref = t + exp() / refresh.rate if refresh is not None else math.inf
    candidates = 0

    while total < budget:
        i = 0
        tc = nxt[0]
        for j in range(1, nm):
            if nxt[j] < tc:
                i, tc = j, nxt[j]
        is_refresh = next_ref < tc
        if is_refresh:
            tc = next_ref
        if tc >= t_end:
            x = x + (t_end - t) * v
            t = t_end
            break
        candidates += 1
        if candidates > config.event_cap:
            raise EventCapExceeded(f"more than {config.event_cap} candidate events before t={tc}")
        x = x + (tc - t) * v
        t = tc

        if is_refresh:
            if refresh.rate_fn is None or rng.uniform() < refresh.accept_probability(x):
                v = apply_refresh(refresh, v, rng)
                log.add(t, REFRESH, REFRESH_COMPONENT, x, v)
                total += rearm_all()
            elif log_ghosts:
                log.add(t, GHOST, REFRESH_COMPONENT, x, v)
            next_ref = t + exp() / refresh.rate
        else:
            m = mechs[i]
            f = m.force.grad(x)
            counts[i] += 1
            total += 1
            lam = m.rate_from_force(x, v, f)
            ratio = checked_ratio(lam, bounds[i].value(t - anchor[i]))
            if ratio > 0.0 and rng.uniform() < ratio:
                v = m.jump_from_force(x, v, f, rng)
                log.add(t, JUMP, i, x, v)
                total += rearm_all(skip=i, f_skip=f)
            else:
                if log_ghosts:
                    log.add(t, GHOST, i, x, v)
                arm(i, f)

    n = len(log.t)
    return Trajectory(
        initial=KineticState(float(initial.t), np.array(initial.x, dtype=float), np.array(initial.v, dtype=float)),
        final=KineticState(t, x, v),
        times=np.frombuffer(log.t, dtype=float).copy(),
        kinds=np.frombuffer(log.kind, dtype=np.int8).copy(),
        components=np.frombuffer(log.comp, dtype=np.int32).copy(),
        positions=np.frombuffer(log.x, dtype=float).reshape(n, d).copy(),
        velocities=np.frombuffer(log.v, dtype=float).reshape(n, d).copy(),
        force_evaluations=tuple(counts),
        labels=tuple(m.label for m in mechs),
        candidates=candidates,
    )


def simulate_replicas(
    config: SimConfig,
    initial: KineticState,
    replicas: int,
    workers: int = 1,
    reduce: Optional[Callable[[Trajectory], object]] = None,
) -> list:
    """Independent replicas on streams ``config.stream + r`` for ``r < replicas``.

    ``reduce`` maps each trajectory to a summary so that long event logs need
    not be kept in memory.
    """
    def one(r):
        traj = simulate(replace(config, stream=config.stream + r), initial)
        return traj if reduce is None else reduce(traj)

    if workers <= 1:
        return [one(r) for r in range(replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(replicas)))


OBSERVABLES = ("|X|^2", "X.V", "X1^2", "X2^2")


def _segment_moments(kind: str, xs, vs):
    """Per-segment ``(x.x, x.v, v.v)`` style coefficients for ``kind``."""
    if kind == "|X|^2" or kind == "X.V":
        return (xs * xs).sum(1), (xs * vs).sum(1), (vs * vs).sum(1)
    if len(kind) >= 4 and kind[0] == "X" and kind.endswith("^2") and kind[1:-2].isdigit():
        i = int(kind[1:-2]) - 1
        if not 0 <= i < xs.shape[1]:
            raise ValueError(f"observable {kind} outside dimension {xs.shape[1]}")
        return xs[:, i] ** 2, xs[:, i] * vs[:, i], vs[:, i] ** 2
    raise ValueError(f"unknown observable {kind!r}; expected one of {OBSERVABLES} or Xi^2")


def _partial_integrals(kind: str, xs, vs, durations):
    xx, xv, vv = _segment_moments(kind, xs, vs)
    d = durations
    if kind == "X.V":
        return xv * d + 0.5 * vv * d * d
    # int_0^D |x + s v|^2 ds
    return xx * d + xv * d * d + vv * d**3 / 3.0


def time_integral(traj: Trajectory, kind: str) -> float:
    _, xs, vs, durations = traj.segments()
    return float(_partial_integrals(kind, xs, vs, durations).sum())


def time_average_quadratic(traj: Trajectory, kind: str = "|X|^2") -> float:
    """Exact time average over the whole trajectory of ``|X|^2``, ``Xi^2`` or ``X.V``."""
    if traj.horizon <= 0:
        raise ValueError("empty trajectory")
    return time_integral(traj, kind) / traj.horizon


def cumulative_integral(traj: Trajectory, kind: str, times) -> np.ndarray:
    """``int_{t_initial}^{tau} obs(X_s, V_s) ds`` at each ``tau`` in ``times``."""
    times = np.asarray(times, dtype=float)
    starts, xs, vs, durations = traj.segments()
    full = _partial_integrals(kind, xs, vs, durations)
    cum = np.concatenate(([0.0], np.cumsum(full)))
    k = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(starts) - 1)
    part = _partial_integrals(kind, xs[k], vs[k], times - starts[k])
    return cum[k] + part


def gradient_eval_count(traj: Trajectory) -> dict:
    """Force evaluations per mechanism label, plus their ``"total"``."""
    out = {}
    for label, n in zip(traj.labels, traj.force_evaluations):
        out[label] = out.get(label, 0) + n
    out["total"] = int(sum(traj.force_evaluations))
    return out


def wedge(x, v):
    """``x1 v2 - x2 v1`` for planar (or row-stacked planar) states."""
    x = np.asarray(x)
    v = np.asarray(v)
    return x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0]
