"""Random instance generators used by the benchmark harness and tests."""

from __future__ import annotations

import numpy as np

from .graph import Graph, load_graph


def random_connected_graph(n: int, extra_edges: int, rng,
                           weight_lo: int = 1, weight_hi: int = 10) -> Graph:
    """Random spanning tree plus `extra_edges` extra edges, integer weights."""
    edges: dict[tuple[int, int], float] = {}
    order = rng.permutation(n)
    for i in range(1, n):
        u = int(order[i])
        v = int(order[rng.integers(0, i)])
        key = (min(u, v), max(u, v))
        edges[key] = float(rng.integers(weight_lo, weight_hi + 1))
    attempts = 0
    while len(edges) < n - 1 + extra_edges and attempts < 20 * (extra_edges + 1):
        attempts += 1
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in edges:
            continue
        edges[key] = float(rng.integers(weight_lo, weight_hi + 1))
    return load_graph([(u, v, w) for (u, v), w in sorted(edges.items())], n=n)


def random_points(n: int, d: int, rng) -> np.ndarray:
    """Uniform points in the unit cube [0, 1]^d."""
    return rng.random((n, d))
