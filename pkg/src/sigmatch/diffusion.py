"""Truncated heat-diffusion wavelets and the dissimilarity matrices built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, laplacian

# below this fill ratio L is multiplied as a CSR matrix
SPARSE_DENSITY = 0.1


@dataclass(frozen=True)
class WaveletParams:
    """Propagation time ``t``, truncation order ``K`` and the margin added to the
    largest wavelet entry to form the shared constant ``psi_bar``."""

    t: float = 1e-3
    K: int = 3
    margin: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if not self.margin > 0:
            raise ValueError(f"margin must be positive, got {self.margin}")


@dataclass(frozen=True)
class DissimilarityPair:
    """Source/target dissimilarities sharing one ``psi_bar``.

    ``b_s[i, j] = psi_bar - psi_s[i, j]`` off the diagonal and 0 on it;
    likewise for ``b_t``.
    """

    b_s: np.ndarray
    b_t: np.ndarray
    psi_bar: float

    @property
    def n(self) -> int:
        return self.b_s.shape[0]


def series_coefficients(t: float, K: int) -> list[float]:
    """``(-t)^k / k!`` for ``k = 0..K``."""
    return [(-t) ** k / math.factorial(k) for k in range(K + 1)]


def heat_wavelet(g: Graph, params: WaveletParams) -> np.ndarray:
    """K-th order Taylor approximation of ``exp(-t L)``.

    Powers of ``L`` are accumulated by repeated left-multiplication, using a
    sparse ``L`` when the graph is sparse, which keeps the cost at
    ``O(K V E)`` rather than ``O(K V^3)``.
    """
    lap = laplacian(g)
    n = g.n
    op = sp.csr_matrix(lap) if n and np.count_nonzero(lap) < SPARSE_DENSITY * n * n else lap
    coef = series_coefficients(params.t, params.K)
    power = np.eye(n)
    psi = coef[0] * power
    for k in range(1, params.K + 1):
        power = np.asarray(op @ power)
        psi = psi + coef[k] * power
    return 0.5 * (psi + psi.T)


def dissimilarity_pair(psi_s: np.ndarray, psi_t: np.ndarray, margin: float = 1.0) -> DissimilarityPair:
    if not (np.all(np.isfinite(psi_s)) and np.all(np.isfinite(psi_t))):
        raise ValueError("wavelet matrices contain non-finite entries")
    if not margin > 0:
        raise ValueError("margin must be positive")
    top = max(psi_s.max(initial=-np.inf), psi_t.max(initial=-np.inf))
    psi_bar = float(top + margin)
    b_s = psi_bar - psi_s
    b_t = psi_bar - psi_t
    np.fill_diagonal(b_s, 0.0)
    np.fill_diagonal(b_t, 0.0)
    return DissimilarityPair(b_s, b_t, psi_bar)


def build_dissimilarities(g_s: Graph, g_t: Graph, params: WaveletParams) -> DissimilarityPair:
    """Wavelets of both graphs turned into a dissimilarity pair in one call."""
    if g_s.n != g_t.n:
        raise ValueError(f"graphs differ in size ({g_s.n} vs {g_t.n}); pad first")
    return dissimilarity_pair(heat_wavelet(g_s, params), heat_wavelet(g_t, params), params.margin)
