"""Isolation set cover: 2*ceil(log2 n) bit-slice vertex subsets.

Identifying each vertex with its binary label, the family contains, for every
bit position i (highest first) and value b, the set of vertices whose i-th
label bit equals b.  Any two distinct vertices differ in some bit, so each
ordered pair is isolated, and the b=0/b=1 slices of any bit jointly cover V.
"""

from __future__ import annotations


class IsolationCover:
    __slots__ = ("n", "size", "masks", "member_idx", "_contains")

    def __init__(self, n: int, masks: list[int]):
        self.n = n
        self.masks = masks
        self.size = len(masks)
        # per-vertex list of set indices containing it
        self.member_idx: list[list[int]] = [[] for _ in range(n)]
        self._contains: list[bytearray] = [bytearray(n) for _ in masks]
        for j, mask in enumerate(masks):
            row = self._contains[j]
            for v in range(n):
                if (mask >> v) & 1:
                    row[v] = 1
                    self.member_idx[v].append(j)

    def contains(self, j: int, v: int) -> bool:
        return bool(self._contains[j][v])

    def membership(self, v: int) -> list[int]:
        return self.member_idx[v]

    def set_members(self, j: int) -> list[int]:
        mask = self.masks[j]
        return [v for v in range(self.n) if (mask >> v) & 1]

    def intersect(self, j: int, vertices: set[int]) -> set[int]:
        row = self._contains[j]
        return {v for v in vertices if row[v]}


def build_cover(n: int) -> IsolationCover:
    """Build the 2*ceil(log2 n) bit-slice cover for vertices 0..n-1."""
    if n < 2:
        raise ValueError(f"cover needs n >= 2, got {n}")
    bits = max(1, (n - 1).bit_length())
    masks: list[int] = []
    for i in range(bits - 1, -1, -1):  # highest bit first
        for b in (0, 1):
            mask = 0
            for v in range(n):
                if (v >> i) & 1 == b:
                    mask |= 1 << v
            masks.append(mask)
    return IsolationCover(n, masks)
