"""Acceptance suite: every criterion as a test, one pass/fail line each.

Shared fixtures run the operation soak (criteria 1 and 7) and the
approximation sweep (criteria 3, 4, 8) once per session.
"""

import math
import time
from itertools import combinations, product

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra
from scipy.stats import chisquare

from kzcluster.cli import run_cli
from kzcluster.cover import build_cover
from kzcluster.gen import random_connected_graph
from kzcluster.graph import write_edge_list
from kzcluster.oracle import (brute_force_opt, check_state_consistency,
                              exact_cost, is_super_effective_noncenter)
from kzcluster.preprocess import (aspect_ratio_bound, coarse_solution,
                                  normalize_weights)
from kzcluster.search import (alpha_z, run_local_search,
                              test_effectiveness as probe_candidate)
from kzcluster.spanner import (LpDataset, PStableLshFamily, build_lsh_spanner,
                               spanner_params, write_points)
from kzcluster.state import StateParams, initialize

RTOL = 1e-9
EPS = 0.05


def _report(num: int, name: str, detail: str = "") -> None:
    line = f"[ACCEPTANCE {num}] {name}: PASS"
    if detail:
        line += f"  ({detail})"
    print(line)


def _make_state(g, centers, z, eps=EPS, beta=None):
    cover = build_cover(g.n)
    params = StateParams.for_graph(g, cover, z, eps, beta)
    return initialize(g, cover, params, centers)


# ---------------------------------------------------------------------------
# criteria 1 + 7: invariant soak with locality instrumentation


@pytest.fixture(scope="module")
def soak():
    rng = np.random.default_rng(2024)
    n_graphs, ops_per_graph = 20, 500
    t0 = time.perf_counter()
    checks = 0
    locality_failures = []
    for gi in range(n_graphs):
        n = int(rng.integers(8, 31))
        g = random_connected_graph(n, int(rng.integers(0, 2 * n)), rng)
        z = float(rng.choice([1.0, 2.0]))
        k0 = int(rng.integers(1, n))
        centers = sorted(rng.choice(n, size=k0, replace=False).tolist())
        st = _make_state(g, centers, z, eps=0.04)
        st.instrument = True
        for _ in range(ops_per_graph):
            nonc = [v for v in range(n) if v not in st.C]
            r = rng.random()
            if (r < 0.45 and nonc) or len(st.C) <= 1:
                c_ins = int(rng.choice(nonc))
                before_cj = [list(row) for row in st.cJ]
                before_dj = [list(row) for row in st.dJ]
                st.insert(c_ins)
                for j in range(st.nj):
                    for v in range(n):
                        if st.cJ[j][v] != c_ins and (
                                st.cJ[j][v] != before_cj[j][v]
                                or st.dJ[j][v] != before_dj[j][v]):
                            locality_failures.append((gi, "insert", j, v))
            elif r < 0.9 and len(st.C) > 1:
                st.delete(int(rng.choice(st.centers())))
                for j, info in st.last_delete_touched.items():
                    if not info["touched"] <= info["subcluster"] | info["boundary"]:
                        locality_failures.append((gi, "delete", j))
            elif st.cost_z > 0:
                st.sample_noncenter(rng)
            rep = check_state_consistency(g, st, rtol=RTOL)
            checks += 1
            assert rep.ok, (gi, rep.violations[:5])
    elapsed = time.perf_counter() - t0
    return {"checks": checks, "elapsed": elapsed,
            "locality_failures": locality_failures}


def test_criterion_1_invariant_soak(soak):
    assert soak["checks"] == 10 ** 4
    assert soak["elapsed"] < 120.0
    _report(1, "invariant soak",
            f"{soak['checks']} ops all consistent in {soak['elapsed']:.1f}s")


def test_criterion_7_locality(soak):
    assert soak["locality_failures"] == []
    _report(7, "insert/delete locality", "no out-of-region touches in the soak")


# ---------------------------------------------------------------------------
# criterion 2: initialization exactness


def test_criterion_2_initialize_exact():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 25))
        g = random_connected_graph(n, int(rng.integers(0, 2 * n)), rng)
        k = int(rng.integers(1, n + 1))
        z = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        centers = sorted(rng.choice(n, size=k, replace=False).tolist())
        st = _make_state(g, centers, z, eps=0.01)
        exact = exact_cost(g, centers, z)
        rel = abs(st.cost_z - exact) / max(1.0, exact)
        worst = max(worst, rel)
        assert rel <= 1e-12
    _report(2, "initialization exactness", f"worst relative gap {worst:.2e}")


# ---------------------------------------------------------------------------
# criteria 3 + 4 + 8: approximation sweep


@pytest.fixture(scope="module")
def sweep():
    rng = np.random.default_rng(31)
    graphs = []
    for _ in range(30):
        n = int(rng.integers(8, 13))
        graphs.append(random_connected_graph(n, int(rng.integers(0, n)), rng))
    opts: dict = {}
    coarse_costs: dict = {}
    runs = []
    t0 = time.perf_counter()
    for k, z in product((2, 3, 4), (1.0, 2.0)):
        for gi, g in enumerate(graphs):
            key = (gi, k, z)
            opts[key] = brute_force_opt(g, k, z)[1]
            coarse_costs[key] = exact_cost(g, coarse_solution(g, k), z)
            cover = build_cover(g.n)
            params = StateParams.for_graph(g, cover, z, EPS)
            for seed in range(50):
                sol, stats = run_local_search(g, k, params, s=48,
                                              rng=np.random.default_rng(seed))
                runs.append({
                    "n": g.n, "k": k, "z": z,
                    "cost": sol.exact_cost, "opt": opts[key],
                    "coarse": coarse_costs[key], "stats": stats,
                })
    return {"runs": runs, "elapsed": time.perf_counter() - t0}


def test_criterion_3_approximation(sweep):
    ratios = []
    for run in sweep["runs"]:
        bound = alpha_z(run["z"], EPS) * run["opt"]
        assert run["cost"] <= bound + 1e-12, run
        if run["opt"] > 0:
            ratios.append(run["cost"] / run["opt"])
    assert sweep["elapsed"] < 600.0
    _report(3, "approximation vs brute force",
            f"{len(sweep['runs'])} runs, ratio mean {np.mean(ratios):.3f} "
            f"max {np.max(ratios):.3f}, alpha_1 {alpha_z(1.0, EPS):.2f} "
            f"alpha_2 {alpha_z(2.0, EPS):.2f}, {sweep['elapsed']:.0f}s")


def test_criterion_4_iteration_and_volume_bounds(sweep):
    for run in sweep["runs"]:
        stats = run["stats"]
        assert stats.positive_iterations <= stats.iteration_cap
        assert stats.volume_sum <= stats.volume_cap + RTOL
        for pre, post, vol in stats.swaps:
            assert post / pre <= 1.0 - (EPS / 2.0) * vol + RTOL
    _report(4, "iteration/volume bounds",
            f"max iterations {max(r['stats'].positive_iterations for r in sweep['runs'])}")


def test_criterion_8_coarse_ratio(sweep):
    for run in sweep["runs"]:
        assert run["coarse"] <= run["n"] ** (run["z"] + 1) * run["opt"] + 1e-9
    _report(8, "coarse solution ratio", "n^(z+1) bound holds on all sweep instances")


# ---------------------------------------------------------------------------
# criterion 5: probe completeness/soundness vs the oracle predicate


def test_criterion_5_probe_equivalence():
    rng = np.random.default_rng(55)
    checked = certified = returned = 0
    for trial in range(10):
        n = int(rng.integers(6, 11))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng)
        z = float(rng.choice([1.0, 2.0]))
        k = int(rng.integers(1, max(2, n - 2)))
        st = _make_state(g, coarse_solution(g, k), z)
        probe = st.clone()
        snap = probe.dump()
        for p in range(n):
            if p in st.C:
                continue
            checked += 1
            ok, _ = is_super_effective_noncenter(st, p)
            cand = probe_candidate(st.cost_z, probe, p)
            assert probe.dump() == snap
            if ok:
                certified += 1
                assert cand is not None, (trial, p)
            if cand is not None:
                returned += 1
                replay = st.clone()
                pre = replay.cost_z
                replay.insert(cand.c_ins)
                vol = replay.volume(cand.c_del)
                replay.delete(cand.c_del)
                assert replay.cost_z / pre <= 1.0 - (EPS / 2.0) * vol + RTOL
    _report(5, "probe equivalence (oracle => pair, pair => effective)",
            f"{checked} noncenters, {certified} certified, {returned} pairs, 0 counterexamples")


# ---------------------------------------------------------------------------
# criterion 6: sampling distribution


def test_criterion_6_sampling_distribution():
    rng = np.random.default_rng(66)
    n_draws = 100000
    center_draws = 0
    pvals = []
    for trial in range(10):
        n = int(rng.integers(8, 16))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng, weight_hi=3)
        z = float(rng.choice([1.0, 2.0]))
        k = int(rng.integers(1, n - 1))
        centers = sorted(rng.choice(n, size=k, replace=False).tolist())
        st = _make_state(g, centers, z)
        mass = np.array([st.tree.get(v) for v in range(n)])
        probs = mass / mass.sum()
        counts = np.zeros(n, dtype=int)
        for _ in range(n_draws):
            counts[st.sample_noncenter(rng)] += 1
        center_draws += int(counts[list(st.C)].sum())
        assert all(counts[v] == 0 for v in range(n) if probs[v] == 0.0)
        # pool tiny-expectation support cells (Cochran) before the chi-square
        support = probs > 0.0
        expected = probs * n_draws
        big = support & (expected >= 5.0)
        small = support & (expected < 5.0)
        f_obs = list(counts[big])
        f_exp = list(expected[big])
        if small.any():
            f_obs.append(counts[small].sum())
            f_exp.append(expected[small].sum())
        stat, p = chisquare(f_obs, f_exp)
        pvals.append(p)
        assert p > 0.001, (trial, p)
    assert center_draws == 0
    _report(6, "sampling distribution",
            f"10 states x {n_draws} draws, min p-value {min(pvals):.3f}, 0 center draws")


# ---------------------------------------------------------------------------
# criterion 9: weight normalization


def test_criterion_9_normalization():
    rng = np.random.default_rng(99)
    # part 1: aspect bound on sweep-style instances
    for _ in range(20):
        n = int(rng.integers(8, 13))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng)
        for z in (1.0, 2.0):
            g2 = normalize_weights(g, 2, z, EPS)
            ws = [w for _, _, w in g2.edges()]
            assert min(ws) == 1.0
            assert max(ws) <= aspect_ratio_bound(n, z, EPS) + 1e-6
    # part 2: exhaustive solution transfer on n <= 10
    for _ in range(5):
        n = int(rng.integers(7, 11))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng)
        k, z, alpha = 2, 1.0, 4.0
        g2 = normalize_weights(g, k, z, EPS, alpha=alpha)
        _, opt = brute_force_opt(g, k, z)
        _, opt2 = brute_force_opt(g2, k, z)
        for combo in combinations(range(n), k):
            if exact_cost(g2, combo, z) <= alpha * opt2 * (1 + 1e-12):
                assert exact_cost(g, combo, z) <= 2.0 ** EPS * alpha * opt * (1 + RTOL)
    _report(9, "weight normalization", "aspect bound + exhaustive solution transfer")


# ---------------------------------------------------------------------------
# criterion 10: ratio constants


def test_criterion_10_alpha_values():
    assert alpha_z(1.0, 0.0) == 6.0
    target = 44.0 + 16.0 * math.sqrt(7.0)
    got = alpha_z(2.0, 0.0)
    assert abs(got - target) <= 1e-6
    _report(10, "alpha constants", f"alpha_1(0)=6 exact, alpha_2(0)={got:.9f}")


# ---------------------------------------------------------------------------
# criterion 11: spanner stretch


def test_criterion_11_spanner_stretch():
    c = 4.0
    t0 = time.perf_counter()
    total = over = 0
    min_ratio = math.inf
    fam = PStableLshFamily(4, 2.0)
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        pts = rng.random((200, 4))
        ds = LpDataset(pts, 2.0)
        dmin, dmax = ds.min_max_distance()
        params = spanner_params(200, dmax / dmin, fam, c, seed=seed)
        g = build_lsh_spanner(ds, fam, c, params, rng=np.random.default_rng(seed))
        work = ds.scaled(1.0 / dmin)

        rows, cols, ws = [], [], []
        for u, v, w in g.edges():
            rows += [u, v]
            cols += [v, u]
            ws += [w, w]
        mat = csr_matrix((ws, (rows, cols)), shape=(g.n, g.n))
        pair_rng = np.random.default_rng(seed)
        us = pair_rng.integers(0, 200, size=1100)
        vs = pair_rng.integers(0, 200, size=1100)
        mask = us != vs
        us, vs = us[mask][:1000], vs[mask][:1000]
        srcs = np.unique(us)
        dist_g = sp_dijkstra(mat, indices=srcs)
        idx = {int(u): i for i, u in enumerate(srcs)}
        ratios = (np.array([dist_g[idx[int(u)], v] for u, v in zip(us, vs)])
                  / work.pair_distances(us, vs))
        total += len(ratios)
        over += int((ratios > 8.0 * c).sum())
        min_ratio = min(min_ratio, float(ratios.min()))
    elapsed = time.perf_counter() - t0
    assert min_ratio >= 1.0 - 1e-12
    assert over / total <= 0.01
    assert elapsed < 180.0
    _report(11, "spanner stretch",
            f"{total} pairs over 20 seeds, {over} above 8c, "
            f"min ratio {min_ratio:.3f}, {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# criterion 12: CLI determinism


def test_criterion_12_cli_determinism(tmp_path):
    g = random_connected_graph(12, 10, np.random.default_rng(8))
    g_path = str(tmp_path / "g.txt")
    write_edge_list(g, g_path)
    blobs = []
    for name in ("a.json", "b.json"):
        out = str(tmp_path / name)
        assert run_cli(["cluster", "--graph", g_path, "--k", "3", "--z", "2",
                        "--seed", "5", "--scheduler", "sequential",
                        "--out", out]) == 0
        blobs.append(open(out, "rb").read())
    assert blobs[0] == blobs[1]

    pts_path = str(tmp_path / "pts.txt")
    write_points(np.random.default_rng(3).random((30, 3)), pts_path)
    blobs = []
    for name in ("c.json", "d.json"):
        out = str(tmp_path / name)
        assert run_cli(["cluster-points", "--points", pts_path, "--metric", "l2",
                        "--c", "4", "--k", "3", "--z", "1", "--seed", "5",
                        "--out", out]) == 0
        blobs.append(open(out, "rb").read())
    assert blobs[0] == blobs[1]
    _report(12, "CLI determinism", "byte-identical JSON for cluster and cluster-points")
