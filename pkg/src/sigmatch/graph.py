"""Undirected weighted graphs, edge-list I/O and synthetic perturbations.

Graphs are stored densely: the matcher works with dense ``V x V`` cost
matrices anyway, so a dense weight matrix costs nothing extra.
"""
from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised when an edge list or ground-truth file cannot be parsed."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph without self-loops.

    Parameters
    ----------
    weights : ndarray, shape (V, V)
        Symmetric non-negative adjacency matrix with zero diagonal.
    labels : tuple of str, optional
        External node identifiers; index ``i`` carries ``labels[i]``.
        Defaults to ``"0", "1", ...``.
    dummies : frozenset of int
        Indices of isolated padding nodes added by :func:`pad_with_dummies`.
    """

    weights: np.ndarray
    labels: tuple[str, ...] = ()
    dummies: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        n = w.shape[0]
        labels = tuple(str(x) for x in self.labels) if self.labels else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} nodes")
        if len(set(labels)) != n:
            raise ValueError("node labels must be unique")
        object.__setattr__(self, "labels", labels)
        dummies = frozenset(int(i) for i in self.dummies)
        if any(not 0 <= i < n for i in dummies):
            raise ValueError("dummy index out of range")
        object.__setattr__(self, "dummies", dummies)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges ``(i, j, w)`` with ``i < j`` in row-major order."""
        iu, ju = np.nonzero(np.triu(self.weights, 1))
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def is_binary(self) -> bool:
        return bool(np.all((self.weights == 0) | (self.weights == 1)))

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown node label {label!r}") from None


@dataclass(frozen=True)
class NoiseSpec:
    """Add ``round(q * |E|)`` uniformly drawn non-edges, seeded."""

    q: float
    seed: int = 0

    def __post_init__(self):
        if not self.q >= 0:
            raise ValueError(f"q must be non-negative, got {self.q}")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")


def from_edges(n: int, edges: Iterable[tuple[int, int] | tuple[int, int, float]]) -> Graph:
    """Build a graph on nodes ``0..n-1`` from index pairs (weight 1 by default)."""
    w = np.zeros((n, n))
    for e in edges:
        i, j = int(e[0]), int(e[1])
        wt = float(e[2]) if len(e) > 2 else 1.0
        w[i, j] = w[j, i] = wt
    return Graph(w)


def parse_edge_list(text: str | io.TextIOBase) -> Graph:
    """Parse ``u v`` / ``u v w`` lines into a :class:`Graph`.

    Lines starting with ``#`` and blank lines are skipped.  Node ids are
    arbitrary tokens mapped to dense indices in order of first appearance.
    Repeating an edge with the same weight is harmless; a different weight
    is an error.
    """
    if not isinstance(text, str):
        text = text.read()
    index: dict[str, int] = {}
    weights: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected 'u v' or 'u v w', got {raw!r}")
        u, v = tokens[0], tokens[1]
        if u == v:
            raise GraphFormatError(f"line {lineno}: self-loop on node {u!r}")
        w = 1.0
        if len(tokens) == 3:
            try:
                w = float(tokens[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: non-numeric weight {tokens[2]!r}") from None
            if not (np.isfinite(w) and w > 0):
                raise GraphFormatError(f"line {lineno}: weight must be positive and finite, got {tokens[2]!r}")
        for tok in (u, v):
            if tok not in index:
                index[tok] = len(index)
        a, b = sorted((index[u], index[v]))
        if (a, b) in weights and weights[a, b] != w:
            raise GraphFormatError(
                f"line {lineno}: edge ({u}, {v}) repeated with weight {w} (was {weights[a, b]})")
        weights[a, b] = w
    n = len(index)
    mat = np.zeros((n, n))
    for (a, b), w in weights.items():
        mat[a, b] = mat[b, a] = w
    return Graph(mat, labels=tuple(index))


def format_edge_list(g: Graph) -> str:
    """Serialize ``g`` as an edge list; unit weights are written without a weight column.

    Isolated nodes cannot be expressed in this format and are dropped.
    """
    out = []
    for i, j, w in g.edges():
        if w == 1.0:
            out.append(f"{g.labels[i]} {g.labels[j]}\n")
        else:
            out.append(f"{g.labels[i]} {g.labels[j]} {w!r}\n")
    return "".join(out)


def parse_truth(text: str | io.TextIOBase) -> list[tuple[str, str]]:
    """Parse a ground-truth file of ``u v`` lines (source label, target label)."""
    if not isinstance(text, str):
        text = text.read()
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v', got {raw!r}")
        if tokens[0] in seen:
            raise GraphFormatError(f"line {lineno}: duplicate source node {tokens[0]!r}")
        seen.add(tokens[0])
        pairs.append((tokens[0], tokens[1]))
    return pairs


def format_truth(pairs: Iterable[tuple[str, str]]) -> str:
    return "".join(f"{u} {v}\n" for u, v in pairs)


def degrees(g: Graph) -> np.ndarray:
    return g.weights.sum(axis=1)


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - W``."""
    lap = -g.weights.copy()
    lap[np.diag_indices_from(lap)] = degrees(g)
    return lap


def k_hop_nodes(g: Graph, i: int, k: int) -> set[int]:
    """Nodes at most ``k`` unweighted hops from ``i``, including ``i``."""
    if not 0 <= i < g.n:
        raise IndexError(f"node {i} out of range for graph with {g.n} nodes")
    if k < 0:
        raise ValueError("k must be non-negative")
    dist = {i: 0}
    queue = deque([i])
    adj = g.weights > 0
    while queue:
        u = queue.popleft()
        if dist[u] == k:
            continue
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return set(dist)


def open_neighbors(g: Graph, i: int) -> set[int]:
    return {int(j) for j in np.flatnonzero(g.weights[i] > 0)}


def validate_permutation(p: Sequence[int], n: int | None = None) -> np.ndarray:
    """Return ``p`` as an int array after checking it is a bijection on ``0..n-1``."""
    arr = np.asarray(p, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("permutation must be one-dimensional")
    if n is not None and arr.size != n:
        raise ValueError(f"permutation has length {arr.size}, expected {n}")
    if not np.array_equal(np.sort(arr), np.arange(arr.size)):
        raise ValueError("permutation is not a bijection")
    return arr


def permutation_matrix(p: Sequence[int]) -> np.ndarray:
    """Hard matching matrix with ``T[i, p[i]] = 1``."""
    arr = validate_permutation(p)
    mat = np.zeros((arr.size, arr.size))
    mat[np.arange(arr.size), arr] = 1.0
    return mat


def permute(g: Graph, p: Sequence[int]) -> tuple[Graph, np.ndarray]:
    """Relabel ``g`` so that node ``i`` becomes node ``p[i]``.

    The returned graph carries fresh dense labels ``"0".."V-1"``.  The
    second return value is the ground truth: source ``i`` corresponds to
    target ``p[i]``.
    """
    arr = validate_permutation(p, g.n)
    w = np.zeros_like(g.weights)
    w[np.ix_(arr, arr)] = g.weights
    dummies = frozenset(int(arr[i]) for i in g.dummies)
    return Graph(w, dummies=dummies), arr.copy()


def random_permutation(n: int, seed: int) -> np.ndarray:
    """Uniform permutation from PCG64; the stream is kept apart from the
    noise stream of the same seed by an extra seed word."""
    return np.random.Generator(np.random.PCG64([seed, 1])).permutation(n)


def pad_with_dummies(g: Graph, target_n: int) -> Graph:
    """Append isolated dummy nodes until the graph has ``target_n`` nodes."""
    if target_n < g.n:
        raise ValueError(f"cannot pad a {g.n}-node graph down to {target_n} nodes")
    if target_n == g.n:
        return g
    w = np.zeros((target_n, target_n))
    w[: g.n, : g.n] = g.weights
    taken = set(g.labels)
    labels = list(g.labels)
    for k in range(target_n - g.n):
        name = f"__dummy{k}"
        while name in taken:
            name = "_" + name
        labels.append(name)
    dummies = g.dummies | frozenset(range(g.n, target_n))
    return Graph(w, labels=tuple(labels), dummies=dummies)


def inject_noise(g: Graph, spec: NoiseSpec) -> Graph:
    """Add ``round(q * |E|)`` unit-weight edges drawn uniformly from the non-edges.

    Rounding is Python's ``round`` (ties to even).  Dummy nodes never receive
    noise edges.  Draws come from numpy's PCG64 seeded with ``spec.seed``, so
    the result is reproducible across platforms.
    """
    m = round(spec.q * g.num_edges)
    if m == 0:
        return g
    real = np.array([i not in g.dummies for i in range(g.n)])
    iu, ju = np.triu_indices(g.n, 1)
    free = (g.weights[iu, ju] == 0) & real[iu] & real[ju]
    iu, ju = iu[free], ju[free]
    if m > iu.size:
        raise ValueError(f"cannot add {m} edges: only {iu.size} non-edges available")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    pick = np.sort(rng.choice(iu.size, size=m, replace=False))
    w = g.weights.copy()
    w[iu[pick], ju[pick]] = 1.0
    w[ju[pick], iu[pick]] = 1.0
    return Graph(w, labels=g.labels, dummies=g.dummies)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) random graph drawn with PCG64 from ``seed``."""
    if not 0 <= p <= 1:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    w = np.zeros((n, n))
    w[iu[keep], ju[keep]] = 1.0
    return Graph(w + w.T)
