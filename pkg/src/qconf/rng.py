"""Seeded generator that counts how many values it has produced."""

from __future__ import annotations

import numpy as np


class CountingRng:
    """Thin wrapper over :class:`numpy.random.Generator`.

    ``draws`` is the number of scalar values produced so far; transcripts
    record it so that replays can be checked draw-for-draw.
    """

    def __init__(self, seed: int | np.random.SeedSequence):
        self._gen = np.random.default_rng(seed)
        self.draws = 0

    @staticmethod
    def derive(seed: int, *path: int) -> np.random.SeedSequence:
        """Independent child seed for a sub-component (e.g. an interceptor)."""
        return np.random.SeedSequence([int(seed) & (2**64 - 1), *path])

    def _count(self, size) -> None:
        self.draws += 1 if size is None else int(np.prod(size))

    def random(self, size=None):
        self._count(size)
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        self._count(size)
        return self._gen.integers(low, high, size=size)

    def choice(self, a, size=None, replace=True):
        self._count(size)
        return self._gen.choice(a, size=size, replace=replace)

    def bytes(self, length: int) -> bytes:
        self.draws += length
        return self._gen.bytes(length)
