import numpy as np
import pytest

from kzcluster.cover import build_cover
from kzcluster.gen import random_connected_graph
from kzcluster.graph import load_graph
from kzcluster.state import StateParams, initialize


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def k3():
    return load_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def path_graph(weights):
    return load_graph([(i, i + 1, w) for i, w in enumerate(weights)])


def make_state(g, centers, z=1.0, eps=0.05, beta=None):
    cover = build_cover(g.n)
    params = StateParams.for_graph(g, cover, z, eps, beta)
    return initialize(g, cover, params, centers)


def random_instance(rng, n_lo=6, n_hi=12, extra=None):
    n = int(rng.integers(n_lo, n_hi + 1))
    if extra is None:
        extra = int(rng.integers(0, n))
    return random_connected_graph(n, extra, rng)
