"""Structural inconsistency (SI) of node pairs and related diagnostics.

``SI(i, i'; T) = sum_{j, j'} T[j, j'] (B^s[i, j] - B^t[i', j'])^2`` measures
how badly the dissimilarity profile of ``i`` disagrees with that of ``i'``
when the rest of the nodes are transported by ``T``.  CSI is SI evaluated at
the true counterpart of every node.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusion import DissimilarityPair, WaveletParams, build_dissimilarities, series_coefficients
from .graph import Graph, k_hop_nodes, laplacian, open_neighbors, permutation_matrix, validate_permutation


def check_plan(d: DissimilarityPair, plan: np.ndarray) -> None:
    if d.b_s.shape != d.b_t.shape:
        raise ValueError("dissimilarity matrices differ in shape")
    if plan.shape != (d.n, d.n):
        raise ValueError(f"plan has shape {plan.shape}, expected {(d.n, d.n)}")


def si_pair(d: DissimilarityPair, plan: np.ndarray, i: int, i2: int) -> float:
    """SI of source node ``i`` and target node ``i2`` by the direct double sum."""
    check_plan(d, plan)
    if not (0 <= i < d.n and 0 <= i2 < d.n):
        raise IndexError(f"node pair ({i}, {i2}) out of range for {d.n} nodes")
    diff = d.b_s[i][:, None] - d.b_t[i2][None, :]
    return float(np.sum(plan * diff * diff))


def si_matrix(d: DissimilarityPair, plan: np.ndarray) -> np.ndarray:
    """All pairwise SI values with two matrix products.

    Expanding the square gives ``h(B^s) p 1^T + 1 (h(B^t) q)^T - 2 B^s T B^t``
    with ``p``, ``q`` the row and column sums of ``T``; for a doubly
    stochastic plan both are all-ones.
    """
    check_plan(d, plan)
    p = plan.sum(axis=1)
    q = plan.sum(axis=0)
    rows = (d.b_s ** 2) @ p
    cols = (d.b_t ** 2) @ q
    return rows[:, None] + cols[None, :] - 2.0 * (d.b_s @ plan @ d.b_t)


def csi(d: DissimilarityPair, plan: np.ndarray, truth) -> np.ndarray:
    """``SI(i, truth[i]; T)`` for every source node ``i``."""
    check_plan(d, plan)
    pi = validate_permutation(truth, d.n)
    diff = d.b_s[:, :, None] - d.b_t[pi][:, None, :]
    return np.einsum("jk,ijk->i", plan, diff * diff)


def _require_binary(*graphs: Graph) -> None:
    for g in graphs:
        if not g.is_binary():
            raise ValueError("this quantity is defined for binary (0/1) graphs only")


def _mapped_sets(g_s: Graph, g_t: Graph, pi, i: int, i2: int) -> tuple[set[int], set[int]]:
    if g_s.n != g_t.n:
        raise ValueError("graphs differ in size")
    pi = validate_permutation(pi, g_s.n)
    image = {int(pi[j]) for j in open_neighbors(g_s, i)}
    return image, open_neighbors(g_t, i2)


def mnc(g_s: Graph, g_t: Graph, pi, i: int, i2: int) -> float:
    """Matched neighborhood consistency: Jaccard similarity of the mapped
    neighbors of ``i`` and the neighbors of ``i2`` (open neighborhoods).

    Two empty neighborhoods count as perfectly consistent (1.0).
    """
    _require_binary(g_s, g_t)
    image, target = _mapped_sets(g_s, g_t, pi, i, i2)
    union = image | target
    if not union:
        return 1.0
    return len(image & target) / len(union)


def si_one_hop_form(g_s: Graph, g_t: Graph, pi, t: float, i: int, i2: int) -> float:
    """Closed form of first-order SI for a matched pair under a hard matching:
    ``t^2 * (|union| - |intersection|)`` of the open neighbor sets.

    Only valid when ``pi[i] == i2``; other pairs pick up terms from the zero
    diagonal of the dissimilarity matrices and are refused.
    """
    _require_binary(g_s, g_t)
    if int(validate_permutation(pi, g_s.n)[i]) != i2:
        raise ValueError(f"pair ({i}, {i2}) is not matched by the permutation")
    image, target = _mapped_sets(g_s, g_t, pi, i, i2)
    return t * t * (len(image | target) - len(image & target))


@dataclass
class PerturbationReport:
    """Per-order local perturbation energies, the resulting CSI upper bound
    (one value per node, all equal) and the CSI values under the truth."""

    eps: np.ndarray
    bound: np.ndarray
    csi: np.ndarray

    def holds(self, atol: float = 1e-9) -> bool:
        return bool(np.all(self.csi <= self.bound + atol))


def perturbation_report(g_s: Graph, g_t: Graph, truth, params: WaveletParams) -> PerturbationReport:
    """Compare CSI under the true matching with its perturbation bound.

    ``Delta_k = (L^s)^k - (P L^t P^T)^k`` where ``P`` registers the target on
    the source.  The target neighborhood of ``truth[i]`` is pulled back to
    source indices before summing ``Delta_k`` over it.
    """
    if g_s.n != g_t.n:
        raise ValueError(f"graphs differ in size ({g_s.n} vs {g_t.n})")
    n = g_s.n
    pi = validate_permutation(truth, n)
    inv = np.empty_like(pi)
    inv[pi] = np.arange(n)
    l_s = laplacian(g_s)
    l_reg = laplacian(g_t)[np.ix_(pi, pi)]
    coef = series_coefficients(params.t, params.K)

    eps = np.zeros(params.K)
    pow_s = np.eye(n)
    pow_r = np.eye(n)
    for k in range(1, params.K + 1):
        pow_s = pow_s @ l_s
        pow_r = pow_r @ l_reg
        delta_sq = (pow_s - pow_r) ** 2
        best = 0.0
        for i in range(n):
            rows = sorted(k_hop_nodes(g_s, i, k))
            cols = sorted(int(inv[j]) for j in k_hop_nodes(g_t, int(pi[i]), k))
            best = max(best, float(delta_sq[np.ix_(rows, cols)].sum()))
        eps[k - 1] = best

    weights = np.array([coef[k] ** 2 for k in range(1, params.K + 1)])
    bound = params.K * float(weights @ eps)
    d = build_dissimilarities(g_s, g_t, params)
    values = csi(d, permutation_matrix(pi), pi)
    return PerturbationReport(eps, np.full(n, bound), values)
