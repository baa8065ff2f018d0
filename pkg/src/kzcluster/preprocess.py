"""Coarse initial solutions and edge-weight normalization."""

from __future__ import annotations

import math

from .errors import InvalidEpsilon, InvalidK
from .graph import Graph, load_graph
from .oracle import exact_cost


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def coarse_solution(g: Graph, k: int) -> list[int]:
    """Kruskal-style coarse centers: union cheapest edges until k components
    remain, then take the smallest-id vertex of each component.

    The result is an n^(z+1)-approximation for every z >= 1.
    """
    if not (1 <= k <= g.n):
        raise InvalidK(f"k must lie in [1, {g.n}], got {k}")
    edges = sorted(
        ((w, idx, u, v) for idx, (u, v, w) in enumerate(g.edges())),
    )
    uf = _UnionFind(g.n)
    components = g.n
    for w, _, u, v in edges:
        if components == k:
            break
        if uf.union(u, v):
            components -= 1
    rep: dict[int, int] = {}
    for v in range(g.n):
        root = uf.find(v)
        if root not in rep or v < rep[root]:
            rep[root] = v
    centers = sorted(rep.values())
    assert len(centers) == k
    return centers


def weight_bounds(g: Graph, k: int, z: float, eps: float,
                  alpha: float) -> tuple[float, float, float]:
    """(w_min, w_max, cost_init) for the clamp, before the global rescale.

    w_min = (1 / ((1 + 3z/eps) n^2))^(1 + 1/z) * cost_init^(1/z)
    w_max = (2^eps * alpha * cost_init)^(1/z)
    """
    cost_init = exact_cost(g, coarse_solution(g, k), z)
    n = g.n
    w_min = (1.0 / ((1.0 + 3.0 * z / eps) * n * n)) ** (1.0 + 1.0 / z) * cost_init ** (1.0 / z)
    w_max = (2.0 ** eps * alpha * cost_init) ** (1.0 / z)
    return w_min, w_max, cost_init


def normalize_weights(g: Graph, k: int, z: float, eps: float,
                      alpha: float | None = None) -> Graph:
    """Clamp weights into [w_min, w_max] and rescale so the minimum is 1.

    Bounds the aspect ratio by 32 z^2 eps^-2 n^(z+5) while preserving
    approximate solutions up to a 2^eps factor.  ``alpha`` (the target
    approximation ratio) is clipped into [1, n^(z+1)]; by default it is the
    local-search ratio for (z, eps).
    """
    if not (0 < eps < 1):
        raise InvalidEpsilon(f"eps must lie in (0, 1), got {eps}")
    if alpha is None:
        from .search import alpha_z

        alpha = alpha_z(z, min(eps, 1.0 / (10.0 * z)))
    alpha = min(max(alpha, 1.0), float(g.n) ** (z + 1))
    w_min, w_max, cost_init = weight_bounds(g, k, z, eps, alpha)
    if cost_init == 0.0:
        return g  # k components already cover every vertex exactly
    clamped = [
        (u, v, min(max(w, w_min), w_max)) for u, v, w in g.edges()
    ]
    scale = 1.0 / min(w for _, _, w in clamped)
    return load_graph([(u, v, w * scale) for u, v, w in clamped], n=g.n)


def aspect_ratio_bound(n: int, z: float, eps: float) -> float:
    """Post-normalization cap on max/min edge weight."""
    return 32.0 * z * z * eps ** -2.0 * float(n) ** (z + 5)
