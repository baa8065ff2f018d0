import numpy as np
import pytest

from kzcluster.errors import InvalidEpsilon, InvalidK
from kzcluster.graph import load_graph
from kzcluster.oracle import brute_force_opt, exact_cost
from kzcluster.preprocess import (aspect_ratio_bound, coarse_solution,
                                  normalize_weights, weight_bounds)

from conftest import k3, path_graph, random_instance


def test_coarse_examples():
    g = path_graph([1.0, 5.0])
    assert coarse_solution(g, 2) == [0, 2]
    assert coarse_solution(g, 3) == [0, 1, 2]
    assert coarse_solution(g, 1) == [0]
    with pytest.raises(InvalidK):
        coarse_solution(g, 0)


def test_coarse_ratio():
    rng = np.random.default_rng(20)
    for _ in range(10):
        g = random_instance(rng, n_hi=12)
        for z in (1.0, 2.0):
            for k in (1, 2, 3):
                _, opt = brute_force_opt(g, k, z)
                coarse = exact_cost(g, coarse_solution(g, k), z)
                assert coarse <= g.n ** (z + 1) * opt + 1e-9


def test_weight_bounds_k3():
    g = k3()
    w_min, w_max, cost_init = weight_bounds(g, 1, 1.0, 0.5, 6.0)
    assert cost_init == 2.0
    assert w_min == pytest.approx((1.0 / (7.0 * 9.0)) ** 2 * 2.0, rel=1e-12)
    assert w_max == pytest.approx(2.0 ** 0.5 * 6.0 * 2.0, rel=1e-12)


def test_normalize_identity_within_bounds():
    g = k3()
    g2 = normalize_weights(g, 1, 1.0, 0.5, alpha=6.0)
    assert sorted(g2.edges()) == sorted(g.edges())  # clamp is identity, scale 1


def test_normalize_clamps_huge_edge():
    g = load_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1e9)])
    g2 = normalize_weights(g, 1, 1.0, 0.5, alpha=6.0)
    w_min, w_max, _ = weight_bounds(g, 1, 1.0, 0.5, 6.0)
    ws = sorted(w for _, _, w in g2.edges())
    assert ws[0] == 1.0
    assert ws[-1] == pytest.approx(w_max / max(1.0, w_min), rel=1e-12)
    assert max(ws) / min(ws) <= w_max / w_min + 1e-9


def test_normalize_eps_range():
    with pytest.raises(InvalidEpsilon):
        normalize_weights(k3(), 1, 1.0, 1.5)


def test_aspect_bound_holds():
    rng = np.random.default_rng(21)
    for _ in range(8):
        g = random_instance(rng, n_hi=12)
        for z, eps in ((1.0, 0.05), (2.0, 0.05)):
            g2 = normalize_weights(g, 2, z, eps)
            ws = [w for _, _, w in g2.edges()]
            assert min(ws) == 1.0
            assert max(ws) <= aspect_ratio_bound(g.n, z, eps) + 1e-6


def test_solution_transfer_exhaustive():
    # every k-subset good on the normalized graph stays good on the original
    from itertools import combinations

    rng = np.random.default_rng(22)
    for _ in range(4):
        g = random_instance(rng, n_lo=7, n_hi=9)
        k, z, eps, alpha = 2, 1.0, 0.25, 4.0
        g2 = normalize_weights(g, k, z, eps, alpha=alpha)
        _, opt = brute_force_opt(g, k, z)
        _, opt2 = brute_force_opt(g2, k, z)
        for combo in combinations(range(g.n), k):
            c2 = exact_cost(g2, combo, z)
            if c2 <= alpha * opt2 * (1 + 1e-12):
                c1 = exact_cost(g, combo, z)
                assert c1 <= 2.0 ** eps * alpha * opt * (1 + 1e-9)
