"""Velocity refreshment events.

Full refreshment redraws the velocity from the standard Gaussian; partial
refreshment applies the Ornstein-Uhlenbeck transition ``p v + sqrt(1-p^2) G``.
Both leave the Gaussian velocity marginal invariant. Events fire at rate
``eta(x)``: either a constant, or a state-dependent rate simulated by thinning
against its supremum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class RefreshSpec:
    """Refreshment kind and rate.

    Args:
        kind: ``"full"`` or ``"partial"``.
        rate: constant rate ``eta0``, or the supremum of ``rate_fn`` when given.
        p: memory of partial refreshment, in ``[0, 1)``.
        rate_fn: optional state-dependent rate ``eta(x) <= rate``.
    """

    kind: str = "full"
    rate: float = 1.0
    p: float = 0.0
    rate_fn: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        if self.kind not in ("full", "partial"):
            raise ValueError(f"refresh kind must be 'full' or 'partial', got {self.kind!r}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"refresh rate must be positive and finite, got {self.rate}")
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"partial refresh memory p must lie in [0, 1), got {self.p}")

    @classmethod
    def full(cls, rate: float = 1.0) -> "RefreshSpec":
        return cls("full", rate)

    @classmethod
    def partial(cls, p: float, rate: float = 1.0) -> "RefreshSpec":
        return cls("partial", rate, p)

    @classmethod
    def state_dependent(cls, rate_fn, sup_bound: float, kind: str = "full", p: float = 0.0) -> "RefreshSpec":
        return cls(kind, sup_bound, p, rate_fn)

    @property
    def memory(self) -> float:
        return self.p if self.kind == "partial" else 0.0

    def accept_probability(self, x) -> float:
        """Thinning ratio ``eta(x)/sup eta``; one for a constant rate."""
        if self.rate_fn is None:
            return 1.0
        eta = float(self.rate_fn(x))
        if eta < 0.0 or eta > self.rate * (1.0 + 1e-12):
            raise ValueError(f"refresh rate {eta} outside [0, {self.rate}]")
        return eta / self.rate


def next_refresh(spec: RefreshSpec, x, v, rng) -> float:
    """Delay to the next refreshment along the free flight from ``(x, v)``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    t = 0.0
    while True:
        t += rng.exponential() / spec.rate
        if spec.rate_fn is None or rng.uniform() < spec.accept_probability(x + t * v):
            return t


def apply_refresh(spec: RefreshSpec, v, rng) -> np.ndarray:
    """Post-refreshment velocity."""
    v = np.asarray(v, dtype=float)
    g = rng.normal_vector(len(v))
    p = spec.memory
    if p == 0.0:
        return g
    return p * v + math.sqrt(1.0 - p * p) * g
