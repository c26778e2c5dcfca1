import itertools

import numpy as np
import pytest

from attnet.data import gen_planted_network, gen_synthetic_multiview
from attnet.network import TopologyGraph


def _loop_oracle(f):
    """Evaluate a tensor network entry by entry over every edge index tuple."""
    topology = f.topology
    n = topology.n_factors
    edges = topology.edges
    out = np.zeros(f.mode_sizes)
    for idx in itertools.product(*[range(s) for s in f.mode_sizes]):
        total = 0.0
        for r in itertools.product(*[range(topology.rank(i, j)) for i, j in edges]):
            bond = dict(zip(edges, r))
            term = 1.0
            for k in range(n):
                key = (idx[k],) + tuple(
                    bond[(min(k, m), max(k, m))] for m in range(n) if m != k
                )
                term *= f.factors[k][key]
            total += term
        out[idx] = total
    return out


def _einsum_oracle(f):
    """Evaluate a tensor network with a single unoptimized `numpy.einsum`."""
    topology = f.topology
    n = topology.n_factors
    operands = []
    for k in range(n):
        operands.append(f.factors[k])
        operands.append(
            [k] + [n + topology.edge_index(k, m) for m in range(n) if m != k]
        )
    return np.einsum(*operands, list(range(n)), optimize=False)


@pytest.fixture
def loop_oracle():
    return _loop_oracle


@pytest.fixture
def einsum_oracle():
    return _einsum_oracle


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _planted_chain(seed, dims=(8, 8, 8, 8), rank=3):
    n = len(dims)
    topology = TopologyGraph.chain(dims, [rank] * (n - 1))
    return gen_planted_network(dims, topology, seed=seed)


@pytest.fixture
def planted_chain():
    """Factory for tensors contracted from a random chain (tensor train) network."""
    return _planted_chain


@pytest.fixture
def small_dataset():
    return gen_synthetic_multiview(
        k=2, per_cluster=4, views=2, subspace_dim=2, noise_sigma=0.01, seed=7
    )


@pytest.fixture
def label_fixture():
    return np.array([0, 0, 1, 1]), np.array([0, 1, 1, 1])
