import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from thetaforge import from_edges  # noqa: E402

import oracles  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def random_graphs(rng):
    """Factory: n random small bipartite graphs."""

    def make(n, max_a, max_b, density=None):
        out = []
        for _ in range(n):
            n_a, n_b, us, vs = oracles.random_bipartite(rng, max_a, max_b,
                                                        density)
            out.append(from_edges(n_a, n_b, us, vs))
        return out

    return make
