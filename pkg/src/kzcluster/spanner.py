"""LSH-based spanner construction lifting point sets into sparse graphs.

For every repetition and every distance scale, M sampled hash functions are
concatenated into one compound key; points sharing a key form a bucket, and
each bucket contributes a star of edges (centered on its minimum-id point)
weighted by true metric distances.  Unioning all stars over N repetitions
yields an O(c)-stretch spanner with high probability.

Supported metrics: l_p for p in [1, 2] via p-stable projections (bucket width
w = 4r), and Jaccard via min-hash with a hub star for far pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import levy_stable, norm

from .errors import DegenerateDataset, ScaleOutOfRange
from .graph import Graph, load_graph


# ---------------------------------------------------------------------------
# datasets


class LpDataset:
    """Points in R^d under the l_p metric, 1 <= p <= 2."""

    def __init__(self, points: np.ndarray, p: float = 2.0):
        self.points = np.asarray(points, dtype=float)
        self.p = float(p)
        self.n = self.points.shape[0]

    def distance(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.points[i] - self.points[j], ord=self.p))

    def pair_distances(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        diff = self.points[us] - self.points[vs]
        return np.linalg.norm(diff, ord=self.p, axis=1)

    def min_max_distance(self) -> tuple[float, float]:
        d = pdist(self.points, "minkowski", p=self.p)
        return float(d.min()), float(d.max())

    def scaled(self, factor: float) -> "LpDataset":
        return LpDataset(self.points * factor, self.p)


class JaccardDataset:
    """Finite sets over a universe {0..U-1} under Jaccard distance."""

    def __init__(self, sets: list[frozenset[int]], universe_size: int):
        self.sets = [frozenset(s) for s in sets]
        self.universe_size = universe_size
        self.n = len(sets)
        self._arrays = [np.fromiter(sorted(s), dtype=np.int64) if s else np.empty(0, np.int64)
                        for s in self.sets]

    def distance(self, i: int, j: int) -> float:
        a, b = self.sets[i], self.sets[j]
        union = len(a | b)
        if union == 0:
            return 0.0
        return 1.0 - len(a & b) / union

    def pair_distances(self, us, vs) -> np.ndarray:
        return np.array([self.distance(int(u), int(v)) for u, v in zip(us, vs)])

    def min_max_distance(self) -> tuple[float, float]:
        ds = [self.distance(i, j) for i in range(self.n) for j in range(i + 1, self.n)]
        return min(ds), max(ds)


# ---------------------------------------------------------------------------
# LSH families


class PStableLshFamily:
    """h(x) = floor((<a, x> + b) / w), a with i.i.d. p-stable entries, w = 4r.

    Collision probability at distance u depends only on w/u, so p1 and p2 are
    scale-free: p1 = p(w/u = 4), p2 = p(w/u = 4/c).
    """

    width_factor = 4.0

    def __init__(self, d: int, p: float = 2.0):
        if not (1.0 <= p <= 2.0):
            raise ValueError(f"p-stable family needs p in [1, 2], got {p}")
        self.d = d
        self.p = float(p)

    def collision_probability(self, ratio: float) -> float:
        """P[h(x) = h(y)] as a function of ratio = w / dist(x, y)."""
        t = ratio
        if self.p == 2.0:
            return float(2.0 * norm.cdf(t) - 1.0
                         - 2.0 / (math.sqrt(2.0 * math.pi) * t) * (1.0 - math.exp(-t * t / 2.0)))
        if self.p == 1.0:
            return float(2.0 * math.atan(t) / math.pi
                         - math.log(1.0 + t * t) / (math.pi * t))
        # numeric integral of 2 f_p(x) (1 - x/t) over [0, t]
        from scipy.integrate import quad

        pdf = levy_stable(self.p, 0.0).pdf
        val, _ = quad(lambda x: 2.0 * pdf(x) * (1.0 - x / t), 0.0, t, limit=200)
        return float(val)

    def p1(self, r: float, c: float) -> float:
        return self.collision_probability(self.width_factor)

    def p2(self, r: float, c: float) -> float:
        return self.collision_probability(self.width_factor / c)

    def rho(self, r: float, c: float) -> float:
        return math.log(1.0 / self.p1(r, c)) / math.log(1.0 / self.p2(r, c))

    def sample(self, r: float, rng):
        w = self.width_factor * r
        if self.p == 2.0:
            a = rng.normal(size=self.d)
        elif self.p == 1.0:
            a = rng.standard_cauchy(size=self.d)
        else:
            a = _chambers_mallows_stuck(self.p, self.d, rng)
        b = rng.uniform(0.0, w)
        return (a, b, w)

    def evaluate(self, h, point) -> int:
        a, b, w = h
        return int(math.floor((float(np.dot(a, point)) + b) / w))

    def bucket_keys(self, hs, points: np.ndarray) -> np.ndarray:
        """Vectorized compound keys: one row per point, one column per hash."""
        amat = np.stack([a for a, _, _ in hs])
        bvec = np.array([b for _, b, _ in hs])
        wvec = np.array([w for _, _, w in hs])
        proj = (amat @ points.T + bvec[:, None]) / wvec[:, None]
        return np.floor(proj).astype(np.int64).T


def _chambers_mallows_stuck(p: float, size: int, rng) -> np.ndarray:
    theta = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size=size)
    e = rng.exponential(1.0, size=size)
    return (np.sin(p * theta) / np.cos(theta) ** (1.0 / p)
            * (np.cos((1.0 - p) * theta) / e) ** ((1.0 - p) / p))


class MinHashJaccardFamily:
    """Min-hash over a random priority assignment on the universe.

    (r, cr, 1 - r, 1 - cr)-sensitive for scales r in [1/|U|, 1/(2c)].
    """

    def __init__(self, universe_size: int):
        if universe_size < 1:
            raise ValueError("universe must be nonempty")
        self.universe_size = universe_size

    def scale_window(self, c: float) -> tuple[float, float]:
        return 1.0 / self.universe_size, 1.0 / (2.0 * c)

    def _check_scale(self, r: float, c: float) -> None:
        lo, hi = self.scale_window(c)
        if not (lo <= r <= hi):
            raise ScaleOutOfRange(f"scale {r} outside [{lo}, {hi}] for c={c}")

    def p1(self, r: float, c: float) -> float:
        self._check_scale(r, c)
        return 1.0 - r

    def p2(self, r: float, c: float) -> float:
        self._check_scale(r, c)
        return 1.0 - c * r

    def rho(self, r: float, c: float) -> float:
        return math.log(1.0 / self.p1(r, c)) / math.log(1.0 / self.p2(r, c))

    def sample(self, r: float, rng) -> np.ndarray:
        return rng.permutation(self.universe_size)

    def evaluate(self, h, point) -> int:
        # `point` is a set of universe elements
        elems = np.fromiter(point, dtype=np.int64) if not isinstance(point, np.ndarray) else point
        if elems.size == 0:
            return -1
        return int(h[elems].min())


# ---------------------------------------------------------------------------
# parameters and construction


@dataclass
class SpannerParams:
    """Scale/repetition schedule of the construction.

    scales: per-scale radii r (after min-distance normalization for l_p);
    widths: per-scale concatenation count M = ceil(log(n^3) / log(1/p2));
    reps:   repetitions N = ceil(c1 * p1^-1 * n^(3 rho) * ln n), via the worst
            scale.
    """

    c: float
    scales: list[float]
    widths: list[int]
    reps: int
    seed: int = 0


def spanner_params(n: int, aspect_ratio: float, family, c: float,
                   rep_constant: float = 3.0, seed: int = 0) -> SpannerParams:
    if isinstance(family, MinHashJaccardFamily):
        lo, hi = family.scale_window(c)
        scales = []
        exp = math.floor(math.log2(hi))
        while 2.0 ** exp >= lo:
            scales.append(2.0 ** exp)
            exp -= 1
        scales.reverse()
    else:
        num_scales = max(1, math.ceil(math.log2(max(aspect_ratio, 1.0))) + 1)
        scales = [2.0 ** i for i in range(num_scales)]
    widths = []
    worst = 1.0
    for r in scales:
        p2 = family.p2(r, c)
        p1 = family.p1(r, c)
        rho = family.rho(r, c)
        widths.append(max(1, math.ceil(math.log(n ** 3) / math.log(1.0 / p2))))
        worst = max(worst, (1.0 / p1) * n ** (3.0 * rho))
    reps = max(1, math.ceil(rep_constant * worst * math.log(max(n, 2))))
    return SpannerParams(c=float(c), scales=scales, widths=widths, reps=reps, seed=seed)


def build_lsh_spanner(dataset, family, c: float, params: SpannerParams,
                      rng=None, stats: dict | None = None) -> Graph:
    """Union of per-(repetition, scale) bucket stars, deduplicated, connected.

    For l_p datasets the points are rescaled so the minimum pairwise distance
    is 1; edge weights are true distances in the rescaled space.  Jaccard
    datasets additionally get a hub star (min-id point to everyone, as the
    scale window only certifies near pairs).  If the union is disconnected, a
    star from point 0 is added and the event recorded in `stats`.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    n = dataset.n
    if n < 2:
        raise DegenerateDataset("need at least two points")
    events: list[str] = []

    jaccard = isinstance(family, MinHashJaccardFamily)
    if jaccard:
        work = dataset
    else:
        dmin, dmax = dataset.min_max_distance()
        if dmax == 0.0 or dmin == 0.0:
            raise DegenerateDataset("dataset contains duplicate points")
        work = dataset.scaled(1.0 / dmin)

    pair_codes: list[np.ndarray] = []
    for _ in range(params.reps):
        for r, m in zip(params.scales, params.widths):
            hs = [family.sample(r, rng) for _ in range(m)]
            if jaccard:
                keys = np.stack(
                    [[family.evaluate(h, work._arrays[i]) for h in hs] for i in range(n)]
                )
            else:
                keys = family.bucket_keys(hs, work.points)
            _, inverse = np.unique(keys, axis=0, return_inverse=True)
            order = np.argsort(inverse, kind="stable")
            inv_sorted = inverse[order]
            boundaries = np.flatnonzero(np.diff(inv_sorted)) + 1
            for bucket in np.split(order, boundaries):
                if bucket.size < 2:
                    continue
                center = int(bucket.min())
                members = bucket[bucket != center]
                pair_codes.append(center * n + members)
    if jaccard:
        # hub star covering pairs beyond the certified scale window
        pair_codes.append(np.arange(1, n, dtype=np.int64))  # 0 * n + v
        events.append("jaccard_hub_star")

    if pair_codes:
        codes = np.unique(np.concatenate(pair_codes))
    else:
        codes = np.empty(0, dtype=np.int64)
    us = codes // n
    vs = codes % n
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    codes = np.unique(lo * n + hi)
    us, vs = codes // n, codes % n

    # connectivity check over the union; fall back to a star from point 0
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in zip(us, vs):
        parent[find(int(u))] = find(int(v))
    roots = {find(v) for v in range(n)}
    if len(roots) > 1:
        events.append(f"connectivity_fallback_star components={len(roots)}")
        star = np.arange(1, n, dtype=np.int64)
        codes = np.unique(np.concatenate([codes, star]))  # 0 * n + v, already lo<hi
        us, vs = codes // n, codes % n

    weights = work.pair_distances(us, vs)
    edges = [(int(u), int(v), float(w)) for u, v, w in zip(us, vs, weights)]
    if stats is not None:
        stats["events"] = events
        stats["edges"] = len(edges)
        stats["reps"] = params.reps
        stats["scales"] = list(params.scales)
        stats["widths"] = list(params.widths)
    return load_graph(edges, n=n)


# ---------------------------------------------------------------------------
# point-set I/O: "n d" header then n rows of d decimals; Jaccard files are
# one space-separated element-id list per line.


def read_points(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
        n, d = int(header[0]), int(header[1])
        data = np.loadtxt(f, ndmin=2)
    if data.shape != (n, d):
        raise ValueError(f"points file header says {(n, d)}, data is {data.shape}")
    return data


def write_points(points: np.ndarray, path: str) -> None:
    n, d = points.shape
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{n} {d}\n")
        for row in points:
            f.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_jaccard_sets(path: str) -> JaccardDataset:
    sets: list[frozenset[int]] = []
    max_elem = -1
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            elems = frozenset(int(x) for x in line.split())
            if elems:
                max_elem = max(max_elem, max(elems))
            sets.append(elems)
    return JaccardDataset(sets, universe_size=max_elem + 1)
