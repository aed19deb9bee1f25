"""Brute-force references for tiny instances.

Everything here is deliberately literal (explicit loops, full enumeration)
so that it shares no code path with the vectorized routines it checks.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .diffusion import DissimilarityPair
from .graph import Graph, k_hop_nodes

MAX_ORACLE_NODES = 8
MAX_SI_NODES = 50
TIE_TOL = 1e-12


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass
class OracleResult:
    best_perm: tuple[int, ...]
    best_objective: float
    unique: bool
    evaluated_count: int


def brute_force_gw(d: DissimilarityPair) -> OracleResult:
    """Minimize the GW objective over all hard matchings.

    Permutations are visited in lexicographic order, so the reported
    minimizer is the lexicographically first one.
    """
    n = d.n
    if n > MAX_ORACLE_NODES:
        raise OracleSizeError(f"brute force is limited to {MAX_ORACLE_NODES} nodes, got {n}")
    b_s, b_t = d.b_s, d.b_t
    best, best_perm, ties, count = np.inf, (), 0, 0
    for perm in itertools.permutations(range(n)):
        p = list(perm)
        val = float(np.sum((b_s - b_t[np.ix_(p, p)]) ** 2))
        count += 1
        if val < best - TIE_TOL:
            best, best_perm, ties = val, perm, 1
        elif abs(val - best) <= TIE_TOL:
            ties += 1
    return OracleResult(tuple(best_perm), float(best), ties == 1, count)


def si_pair_bruteforce(d: DissimilarityPair, plan, i: int, i2: int) -> float:
    n = d.n
    if n > MAX_SI_NODES:
        raise OracleSizeError(f"quadruple loop is limited to {MAX_SI_NODES} nodes, got {n}")
    row_s = [float(x) for x in d.b_s[i]]
    row_t = [float(x) for x in d.b_t[i2]]
    weights = [[float(x) for x in row] for row in plan]
    total = 0.0
    for j in range(n):
        for j2 in range(n):
            diff = row_s[j] - row_t[j2]
            total += weights[j][j2] * diff * diff
    return total


def gw_objective_bruteforce(d: DissimilarityPair, plan) -> float:
    n = d.n
    if n > MAX_SI_NODES:
        raise OracleSizeError(f"quadruple loop is limited to {MAX_SI_NODES} nodes, got {n}")
    b_s = [[float(x) for x in row] for row in d.b_s]
    b_t = [[float(x) for x in row] for row in d.b_t]
    weights = [[float(x) for x in row] for row in plan]
    total = 0.0
    for i in range(n):
        for i2 in range(n):
            if weights[i][i2] == 0:
                continue
            for j in range(n):
                for j2 in range(n):
                    diff = b_s[i][j] - b_t[i2][j2]
                    total += diff * diff * weights[i][i2] * weights[j][j2]
    return total


def neighborhoods_isomorphic(g_s: Graph, i: int, g_t: Graph, i2: int, k: int) -> bool:
    """Exact rooted isomorphism test of the ``k``-hop induced subgraphs.

    The root must map to the root and edge weights must agree exactly.
    """
    a = sorted(k_hop_nodes(g_s, i, k))
    b = sorted(k_hop_nodes(g_t, i2, k))
    if max(len(a), len(b)) > MAX_ORACLE_NODES:
        raise OracleSizeError(f"neighborhoods larger than {MAX_ORACLE_NODES} nodes")
    if len(a) != len(b):
        return False
    a_rest = [x for x in a if x != i]
    b_rest = [x for x in b if x != i2]
    src = [i] + a_rest
    w_s = g_s.weights[np.ix_(src, src)]
    for perm in itertools.permutations(b_rest):
        dst = [i2] + list(perm)
        if np.array_equal(w_s, g_t.weights[np.ix_(dst, dst)]):
            return True
    return False
