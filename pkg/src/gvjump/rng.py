"""Reproducible random streams.

Every trajectory draws from its own counter-based Philox stream, keyed by
``(seed, stream_id)``. Draws are taken from numpy in blocks and served one
at a time, which keeps the per-event cost of the scalar event loop low while
staying bit-for-bit reproducible.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RandomStream:
    """Buffered scalar draws from a Philox generator.

    Args:
        seed: non-negative integer seed (the high 64 bits of the Philox key).
        stream: stream index, e.g. the replica number (the low 64 bits).
        block: number of variates fetched from numpy per refill.
    """

    __slots__ = ("seed", "stream", "block", "generator", "_u", "_e", "_n")

    def __init__(self, seed: int = 0, stream: int = 0, block: int = 2048):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative")
        self.seed = int(seed)
        self.stream = int(stream)
        self.block = int(block)
        key = ((self.seed & _MASK64) << 64) | (self.stream & _MASK64)
        self.generator = np.random.Generator(np.random.Philox(key=key))
        self._u: list[float] = []
        self._e: list[float] = []
        self._n: list[float] = []

    def uniform(self) -> float:
        """Uniform draw on [0, 1)."""
        if not self._u:
            self._u = self.generator.random(self.block).tolist()
        return self._u.pop()

    def exponential(self) -> float:
        """Unit-rate exponential draw."""
        if not self._e:
            self._e = self.generator.standard_exponential(self.block).tolist()
        return self._e.pop()

    def normal(self) -> float:
        """Standard normal draw."""
        if not self._n:
            self._n = self.generator.standard_normal(self.block).tolist()
        return self._n.pop()

    def normal_vector(self, dim: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(dim)])

    def spawn(self, stream: int) -> "RandomStream":
        """Independent stream sharing this stream's seed."""
        return RandomStream(self.seed, stream, self.block)


def make_stream(seed: int, stream: int = 0) -> RandomStream:
    return RandomStream(seed, stream)
