"""Fenwick (binary indexed) tree over nonnegative float weights.

Backs the samplers whose per-node attachment weights are not expressible
as a uniform draw over an endpoint list: Buckley-Osthus with a < 1,
power attachment functions, and the community-structured dynamics.
Indices are 1-based to match node numbering.
"""

from __future__ import annotations

import numpy as np


class CumulativeSumTree:
    """Prefix sums with O(log n) point updates and cumulative search."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._capacity = capacity
        self._tree = np.zeros(capacity + 1)
        self._total = 0.0
        # highest power of two <= capacity, for the descending search
        self._top = 1 << (capacity.bit_length() - 1)

    @property
    def capacity(self) -> int:
        return self._capacity

    def total(self) -> float:
        return self._total

    def add(self, index: int, delta: float) -> None:
        if not 1 <= index <= self._capacity:
            raise IndexError(f"index {index} outside 1..{self._capacity}")
        tree = self._tree
        j = index
        while j <= self._capacity:
            tree[j] += delta
            j += j & -j
        self._total += delta

    def prefix_sum(self, index: int) -> float:
        """Sum of weights at indices 1..index."""
        if not 0 <= index <= self._capacity:
            raise IndexError(f"index {index} outside 0..{self._capacity}")
        tree = self._tree
        s = 0.0
        j = index
        while j > 0:
            s += tree[j]
            j -= j & -j
        return s

    def get(self, index: int) -> float:
        return self.prefix_sum(index) - self.prefix_sum(index - 1)

    def find(self, value: float) -> int:
        """Smallest index whose cumulative sum exceeds `value`.

        For value drawn uniformly from [0, total()) this samples an index
        with probability proportional to its weight.
        """
        tree = self._tree
        idx = 0
        remaining = value
        half = self._top
        while half > 0:
            probe = idx + half
            if probe <= self._capacity and tree[probe] <= remaining:
                remaining -= tree[probe]
                idx = probe
            half >>= 1
        return idx + 1
