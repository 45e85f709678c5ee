"""Velocity Verlet reference for the deterministic Hamiltonian flow
``x' = v, v' = -grad U(x)``, used as the small-epsilon limit of the jump process.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class VerletConfig:
    step: float
    horizon: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.horizon >= self.step:
            raise ValueError(f"horizon {self.horizon} shorter than one step {self.step}")


@dataclass(frozen=True)
class DensePath:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    def positions_at(self, times) -> np.ndarray:
        """Linear interpolation of the stored positions."""
        times = np.asarray(times, dtype=float)
        out = np.empty(times.shape + (self.positions.shape[1],))
        for i in range(self.positions.shape[1]):
            out[..., i] = np.interp(times, self.times, self.positions[:, i])
        return out


def verlet(potential, x0, v0, config: VerletConfig, grad=None) -> DensePath:
    """Velocity Verlet integration; returns the state after every step.

    The number of steps is ``round(horizon/step)``, so the last time equals
    the horizon up to rounding of the step. ``grad`` overrides the potential's
    counted gradient (handy to keep reference runs out of cost accounting).
    """
    g = grad if grad is not None else potential.grad
    h = config.step
    n = max(1, int(round(config.horizon / h)))
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    xs = np.empty((n + 1, len(x)))
    vs = np.empty((n + 1, len(x)))
    xs[0], vs[0] = x, v
    f = g(x)
    for k in range(1, n + 1):
        v_half = v - 0.5 * h * f
        x = x + h * v_half
        f = g(x)
        v = v_half - 0.5 * h * f
        xs[k], vs[k] = x, v
    return DensePath(np.arange(n + 1) * h, xs, vs)


def harmonic_flow(x0, v0, times) -> tuple[np.ndarray, np.ndarray]:
    """Exact flow for ``U = |x|^2/2``: rotation in every ``(x_i, v_i)`` plane."""
    t = np.asarray(times, dtype=float)[..., None]
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    c, s = np.cos(t), np.sin(t)
    return x0 * c + v0 * s, v0 * c - x0 * s


def sup_distance(times, path_a, path_b) -> float:
    """``max_t |a(t) - b(t)|`` over the given time grid."""
    d = np.asarray(path_a) - np.asarray(path_b)
    return float(np.max(np.sqrt(np.sum(d * d, axis=-1)))) if len(d) else 0.0


def energy(x, v, stiffness=1.0) -> float:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return 0.5 * float(v @ v) + 0.5 * float(np.sum(stiffness * x * x))

