"""Weighted undirected graphs and exact shortest-path primitives.

A :class:`Graph` is immutable after construction: adjacency lists store both
directions of every edge, ``m`` counts each undirected edge once.  All
distance computations in the package funnel through
:func:`multi_source_dijkstra`; ties between equal distances are broken by the
smaller source label so that results are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappush, heappop
from typing import Iterable, Sequence

from .errors import (
    DisconnectedGraph,
    EmptySources,
    NegativeWeight,
    SelfLoop,
    SingletonGraph,
)

NO_LABEL = -1


class Graph:
    """Connected weighted undirected graph on vertices ``0..n-1``.

    adjacency[u] is a list of (v, w) pairs; each undirected edge appears in
    both endpoint lists with the same weight.
    """

    __slots__ = ("n", "m", "adjacency", "degree", "max_weight", "min_weight", "_apd")

    def __init__(self, n: int, adjacency: list[list[tuple[int, float]]], m: int):
        self.n = n
        self.m = m
        self.adjacency = adjacency
        self.degree = [len(adjacency[v]) for v in range(n)]
        weights = [w for nbrs in adjacency for (_, w) in nbrs]
        self.max_weight = max(weights) if weights else 0.0
        self.min_weight = min(weights) if weights else 0.0
        self._apd: list[list[float]] | None = None  # lazy all-pairs cache

    def edges(self) -> Iterable[tuple[int, int, float]]:
        """Yield each undirected edge once as (u, v, w) with u < v."""
        for u in range(self.n):
            for v, w in self.adjacency[u]:
                if u < v:
                    yield (u, v, w)

    def all_pairs_distances(self) -> list[list[float]]:
        """Exact all-pairs distances (cached); intended for desk-scale graphs."""
        if self._apd is None:
            self._apd = [
                multi_source_dijkstra(self, [(s, 0.0)]).distance for s in range(self.n)
            ]
        return self._apd


@dataclass
class DistArray:
    """Result of a multi-source Dijkstra run.

    distance[v] = min over sources of (offset + dist(source, v));
    label[v] = the arg-min source, ties broken by smaller source id.
    """

    distance: list[float]
    label: list[int]


def load_graph(edge_list: Sequence[tuple[int, int, float]], n: int | None = None) -> Graph:
    """Validate an edge list and build a :class:`Graph`.

    ``n`` may declare isolated trailing vertices; by default it is inferred as
    ``max id + 1``.  Raises on self loops, negative or non-finite weights,
    singleton graphs, and disconnected inputs.
    """
    max_id = -1
    for u, v, w in edge_list:
        if u == v:
            raise SelfLoop(f"self loop at vertex {u}")
        if not math.isfinite(w) or w < 0:
            raise NegativeWeight(f"edge ({u},{v}) has invalid weight {w}")
        max_id = max(max_id, u, v)
    if n is None:
        n = max_id + 1
    elif max_id >= n:
        raise DisconnectedGraph(f"edge endpoint {max_id} outside declared range [0,{n})")
    if n < 2:
        raise SingletonGraph(f"graph must have at least 2 vertices, got {n}")

    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    m = 0
    for u, v, w in edge_list:
        key = (u, v) if u < v else (v, u)
        if key in seen:
            continue
        seen.add(key)
        adjacency[u].append((v, float(w)))
        adjacency[v].append((u, float(w)))
        m += 1

    # one traversal to verify connectivity
    visited = [False] * n
    stack = [0]
    visited[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v, _ in adjacency[u]:
            if not visited[v]:
                visited[v] = True
                count += 1
                stack.append(v)
    if count != n:
        missing = next(v for v in range(n) if not visited[v])
        raise DisconnectedGraph(f"vertex {missing} unreachable from vertex 0")
    return Graph(n, adjacency, m)


def multi_source_dijkstra(g: Graph, sources: Iterable[tuple[int, float]]) -> DistArray:
    """Dijkstra from a set of (vertex, offset) sources, offsets >= 0.

    Ties between sources at equal distance resolve to the smaller source id.
    """
    src = list(sources)
    if not src:
        raise EmptySources("multi_source_dijkstra requires at least one source")
    inf = math.inf
    dist = [inf] * g.n
    label = [NO_LABEL] * g.n
    heap: list[tuple[float, int, int]] = []
    for s, off in src:
        off = float(off)
        if off < dist[s] or (off == dist[s] and s < label[s]):
            dist[s] = off
            label[s] = s
            heappush(heap, (off, s, s))
    adjacency = g.adjacency
    while heap:
        d, lab, u = heappop(heap)
        if d > dist[u] or (d == dist[u] and lab > label[u]):
            continue
        for v, w in adjacency[u]:
            nd = d + w
            if nd < dist[v] or (nd == dist[v] and lab < label[v]):
                dist[v] = nd
                label[v] = lab
                heappush(heap, (nd, lab, v))
    return DistArray(distance=dist, label=label)


# ---------------------------------------------------------------------------
# edge-list text format: first line "n m", then m lines "u v w"

def parse_edge_list(text: str) -> Graph:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln and not ln.startswith("#")]
    if not lines:
        raise SingletonGraph("empty edge-list file")
    header = lines[0].split()
    n, m = int(header[0]), int(header[1])
    edges = []
    for ln in lines[1 : m + 1]:
        parts = ln.split()
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return load_graph(edges, n=n)


def read_edge_list(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        return parse_edge_list(f.read())


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    for u, v, w in g.edges():
        lines.append(f"{u} {v} {w!r}")
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_edge_list(g))
