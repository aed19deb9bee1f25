import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sigmatch.graph import (Graph, GraphFormatError, NoiseSpec, degrees, format_edge_list, from_edges,
                            inject_noise, k_hop_nodes, laplacian, pad_with_dummies, parse_edge_list,
                            parse_truth, permute, random_permutation)

from conftest import random_graph


def test_parse_unweighted_path():
    g = parse_edge_list("0 1\n1 2\n")
    assert g.n == 3
    assert g.edges() == [(0, 1, 1.0), (1, 2, 1.0)]
    assert g.labels == ("0", "1", "2")


def test_parse_labels_weights_and_comments():
    g = parse_edge_list("a b 2.5\n# comment\nb c 1\n")
    assert g.n == 3
    assert g.labels == ("a", "b", "c")
    assert g.weights[0, 1] == 2.5 and g.weights[1, 0] == 2.5
    assert g.weights[1, 2] == 1.0


@pytest.mark.parametrize("text", ["0 0\n", "0\n", "0 1 2 3\n", "0 1 x\n", "0 1 0\n", "0 1 -1\n",
                                  "0 1 2\n1 0 3\n"])
def test_parse_rejects(text):
    with pytest.raises(GraphFormatError):
        parse_edge_list(text)


def test_duplicate_identical_lines_are_idempotent():
    assert np.array_equal(parse_edge_list("a b 2\nb a 2\n").weights, parse_edge_list("a b 2\n").weights)


def test_edge_list_round_trip(weighted_path):
    again = parse_edge_list(format_edge_list(weighted_path))
    assert np.array_equal(again.weights, weighted_path.weights)


def test_graph_rejects_invalid_weights():
    with pytest.raises(ValueError):
        Graph(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        Graph(np.array([[1.0, 0], [0, 0]]))
    with pytest.raises(ValueError):
        Graph(np.array([[0, -1.0], [-1.0, 0]]))


def test_laplacian_examples(p3, weighted_path):
    assert np.array_equal(laplacian(p3), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    assert np.array_equal(laplacian(Graph(np.zeros((2, 2)))), np.zeros((2, 2)))
    assert np.array_equal(laplacian(weighted_path), [[1, -1, 0], [-1, 3, -2], [0, -2, 2]])


def test_degrees_examples(p3, weighted_path):
    assert np.array_equal(degrees(p3), [1, 2, 1])
    assert np.array_equal(degrees(Graph(np.zeros((1, 1)))), [0])
    assert np.array_equal(degrees(weighted_path), [1, 3, 2])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 15), st.integers(0, 2**32 - 1), st.booleans())
def test_laplacian_properties(n, seed, weighted):
    g = random_graph(np.random.default_rng(seed), n, weighted=weighted)
    lap = laplacian(g)
    assert np.array_equal(lap, lap.T)
    assert np.all(np.abs(lap.sum(axis=1)) <= 1e-12 * max(np.abs(lap).max(), 1.0))


def test_k_hop_nodes(p3):
    assert k_hop_nodes(p3, 0, 1) == {0, 1}
    assert k_hop_nodes(p3, 0, 0) == {0}
    assert k_hop_nodes(p3, 0, 2) == {0, 1, 2}
    with pytest.raises(IndexError):
        k_hop_nodes(p3, 3, 1)


def test_pad_with_dummies(p3):
    padded = pad_with_dummies(p3, 5)
    assert padded.n == 5
    assert padded.edges() == p3.edges()
    assert np.array_equal(degrees(padded)[3:], [0, 0])
    assert padded.dummies == {3, 4}
    assert np.array_equal(padded.weights[:3, :3], p3.weights)
    assert pad_with_dummies(p3, 3) is p3
    with pytest.raises(ValueError):
        pad_with_dummies(p3, 2)


def test_permute_examples(p3):
    same, truth = permute(p3, [0, 1, 2])
    assert np.array_equal(same.weights, p3.weights)
    assert list(truth) == [0, 1, 2]

    moved, _ = permute(p3, [2, 0, 1])
    assert {(i, j) for i, j, _ in moved.edges()} == {(0, 2), (0, 1)}
    assert degrees(moved)[0] == 2

    edge = from_edges(2, [(0, 1)])
    assert np.array_equal(permute(edge, [1, 0])[0].weights, edge.weights)


@pytest.mark.parametrize("bad", [[0, 1], [0, 0, 1], [0, 1, 3]])
def test_permute_rejects(p3, bad):
    with pytest.raises(ValueError):
        permute(p3, bad)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_permute_inverse_restores_weights(n, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, weighted=True)
    p = rng.permutation(n)
    inv = np.argsort(p)
    back, _ = permute(permute(g, p)[0], inv)
    assert np.array_equal(back.weights, g.weights)


def test_inject_noise_counts():
    g = from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (1, 3), (2, 4), (3, 5), (0, 5)])
    assert g.num_edges == 10
    noisy = inject_noise(g, NoiseSpec(0.2, seed=7))
    assert noisy.num_edges == 12
    assert inject_noise(g, NoiseSpec(0.0, seed=7)) is g
    again = inject_noise(g, NoiseSpec(0.2, seed=7))
    assert np.array_equal(noisy.weights, again.weights)


def test_inject_noise_rounds_half_to_even():
    g = from_edges(8, [(0, 1), (2, 3)])
    assert inject_noise(g, NoiseSpec(0.25, 0)).num_edges == 2
    assert inject_noise(g, NoiseSpec(0.75, 0)).num_edges == 4


def test_inject_noise_errors():
    with pytest.raises(ValueError):
        NoiseSpec(-0.1)
    triangle = from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ValueError):
        inject_noise(triangle, NoiseSpec(1.0, 0))


def test_inject_noise_skips_dummies():
    g = pad_with_dummies(from_edges(3, [(0, 1)]), 6)
    noisy = inject_noise(g, NoiseSpec(2.0, 0))
    assert noisy.num_edges == 3
    assert np.all(noisy.weights[3:] == 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 25), st.integers(0, 2**32 - 1), st.floats(0, 0.5))
def test_inject_noise_preserves_existing_weights(n, seed, q):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, p=0.3, weighted=True)
    m = round(q * g.num_edges)
    free = n * (n - 1) // 2 - g.num_edges
    if m > free:
        return
    noisy = inject_noise(g, NoiseSpec(q, seed))
    assert noisy.num_edges == g.num_edges + m
    had = g.weights > 0
    assert np.array_equal(noisy.weights[had], g.weights[had])
    assert np.all(noisy.weights[(~had) & (noisy.weights > 0)] == 1.0)


def test_random_permutation_is_reproducible():
    assert np.array_equal(random_permutation(10, 3), random_permutation(10, 3))


def test_parse_truth():
    assert parse_truth("a x\n# c\nb y\n") == [("a", "x"), ("b", "y")]
    with pytest.raises(GraphFormatError):
        parse_truth("a x\na y\n")
    with pytest.raises(GraphFormatError):
        parse_truth("a x y\n")
