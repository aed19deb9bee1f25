import itertools

import numpy as np
import pytest

from sigmatch.diffusion import DissimilarityPair, WaveletParams, build_dissimilarities
from sigmatch.graph import Graph, from_edges, permute, random_permutation
from sigmatch.oracle import brute_force_gw
from sigmatch.transport import sinkhorn_project


@pytest.fixture
def p3():
    return from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def weighted_path():
    return from_edges(3, [(0, 1, 1.0), (1, 2, 2.0)])


def random_graph(rng, n, p=0.4, weighted=False):
    upper = np.triu(rng.random((n, n)) < p, 1).astype(float)
    if weighted:
        upper *= rng.uniform(0.5, 2.0, size=(n, n))
    return Graph(upper + upper.T)


def connected(g):
    from sigmatch.graph import k_hop_nodes
    return g.n <= 1 or len(k_hop_nodes(g, 0, g.n)) == g.n


def random_plan(rng, n, tol=1e-8):
    return sinkhorn_project(rng.uniform(0.05, 1.0, size=(n, n)), tol=tol, max_sweeps=10_000).plan


def random_pair(rng, n, params=None, weighted=True):
    params = params or WaveletParams(t=rng.uniform(0.05, 0.8), K=int(rng.integers(1, 4)))
    return build_dissimilarities(random_graph(rng, n, weighted=weighted),
                                 random_graph(rng, n, weighted=weighted), params)


def automorphism_count(g):
    """Number of permutations preserving the weight matrix, by enumeration."""
    n = g.n
    return sum(
        np.array_equal(g.weights, g.weights[np.ix_(p, p)])
        for p in map(list, itertools.permutations(range(n)))
    )


def asymmetric_isomorphic_pairs(count, n_range=(5, 7), seed=0, params=None):
    """Connected graphs with a unique GW-optimal matching against a random relabeling.

    Uniqueness is certified by exhaustive enumeration.
    """
    rng = np.random.default_rng(seed)
    params = params or WaveletParams()
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        g = random_graph(rng, n, p=0.45)
        if not connected(g):
            continue
        target, perm = permute(g, random_permutation(n, int(rng.integers(1 << 30))))
        res = brute_force_gw(build_dissimilarities(g, target, params))
        if res.unique:
            out.append((g, target, perm, res))
    return out


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
