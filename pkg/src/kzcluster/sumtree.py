"""Fixed-shape binary sum tree over per-vertex values, with proportional sampling."""

from __future__ import annotations


class SumTree:
    """Complete binary tree; leaf i holds value[i], internal nodes hold child sums.

    Leaves are padded to the next power of two with zeros.  Updating a leaf
    recomputes the root path, so the root always equals the pairwise sum of the
    current leaves.
    """

    __slots__ = ("n", "base", "nodes")

    def __init__(self, values: list[float]):
        self.n = len(values)
        size = 1
        while size < self.n:
            size *= 2
        self.base = size
        self.nodes = [0.0] * (2 * size)
        self.nodes[size : size + self.n] = [float(x) for x in values]
        for i in range(size - 1, 0, -1):
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1]

    @property
    def root(self) -> float:
        return self.nodes[1]

    def get(self, i: int) -> float:
        return self.nodes[self.base + i]

    def set(self, i: int, value: float) -> None:
        nodes = self.nodes
        pos = self.base + i
        nodes[pos] = value
        pos //= 2
        while pos:
            nodes[pos] = nodes[2 * pos] + nodes[2 * pos + 1]
            pos //= 2

    def sample(self, rng) -> int:
        """Return leaf index i with probability value[i] / root."""
        nodes = self.nodes
        pos = 1
        while pos < self.base:
            left = 2 * pos
            x = rng.random() * nodes[pos]
            pos = left if x < nodes[left] else left + 1
        return pos - self.base

    def clone(self) -> "SumTree":
        t = SumTree.__new__(SumTree)
        t.n = self.n
        t.base = self.base
        t.nodes = list(self.nodes)
        return t
