"""Gromov-Wasserstein objective, its gradient, Sinkhorn projection and the
KL mirror-descent step on doubly stochastic plans."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .diffusion import DissimilarityPair
from .graph import Graph, degrees
from .inconsistency import check_plan, si_matrix

MarginalMode = Literal["ones", "weights"]


class ProjectionError(RuntimeError):
    """The matrix cannot be scaled to a doubly stochastic plan."""


@dataclass
class SinkhornResult:
    plan: np.ndarray
    marginal_error: float
    sweeps: int
    converged: bool


@dataclass(frozen=True)
class StepSchedule:
    """Constant step size, either given directly (``mode="fixed"``) or chosen
    at the first iteration so that ``eta * max(gradient) == target``."""

    mode: Literal["fixed", "auto"] = "auto"
    eta: float = 1.0
    target: float = 30.0

    def __post_init__(self):
        if self.mode not in ("fixed", "auto"):
            raise ValueError(f"unknown step mode {self.mode!r}")
        if not self.eta > 0 or not self.target > 0:
            raise ValueError("step size parameters must be positive")

    def resolve(self, grad0: np.ndarray) -> float:
        if self.mode == "fixed":
            return self.eta
        top = float(np.max(np.abs(grad0), initial=0.0))
        return self.target / top if top > 0 else self.eta


def marginals(g: Graph, mode: MarginalMode = "ones") -> np.ndarray:
    """All-ones marginals, or degree-proportional ones summing to 1."""
    if mode == "ones":
        return np.ones(g.n)
    if mode == "weights":
        d = degrees(g)
        if np.any(d <= 0):
            raise ValueError("weight-derived marginals need every node to have positive degree")
        return d / d.sum()
    raise ValueError(f"unknown marginal mode {mode!r}")


def gw_objective(d: DissimilarityPair, plan: np.ndarray) -> float:
    """``sum (B^s_ij - B^t_i'j')^2 T_ii' T_jj'`` via ``<T, S(T)>``."""
    return float(np.sum(plan * si_matrix(d, plan)))


def gw_gradient(d: DissimilarityPair, plan: np.ndarray, mu_s=None, mu_t=None) -> np.ndarray:
    """``h(B^s) mu_s 1^T + 1 (h(B^t) mu_t)^T - 2 B^s T B^t``.

    With the default all-ones marginals this is the SI matrix of a doubly
    stochastic plan.  Note the exact derivative of :func:`gw_objective` is
    twice this matrix; the factor is absorbed by the step size.
    """
    check_plan(d, plan)
    mu_s = np.ones(d.n) if mu_s is None else np.asarray(mu_s, dtype=float)
    mu_t = np.ones(d.n) if mu_t is None else np.asarray(mu_t, dtype=float)
    if mu_s.shape != (d.n,) or mu_t.shape != (d.n,):
        raise ValueError("marginal vectors must have one entry per node")
    s = (d.b_s ** 2) @ mu_s
    t = (d.b_t ** 2) @ mu_t
    return s[:, None] + t[None, :] - 2.0 * (d.b_s @ plan @ d.b_t)


def marginal_error(plan: np.ndarray) -> float:
    return float(max(np.max(np.abs(plan.sum(axis=1) - 1.0), initial=0.0),
                     np.max(np.abs(plan.sum(axis=0) - 1.0), initial=0.0)))


def sinkhorn_project(m: np.ndarray, tol: float = 1e-8, max_sweeps: int = 500) -> SinkhornResult:
    """Scale ``m`` to unit row and column sums by alternating normalization.

    At least one sweep is always made.  A result with ``converged=False`` is
    returned when ``max_sweeps`` is exhausted; callers decide whether that
    is fatal.
    """
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise ValueError("matrix entries must be finite and non-negative")
    if np.any(m.sum(axis=1) <= 0) or np.any(m.sum(axis=0) <= 0):
        raise ProjectionError("matrix has an all-zero row or column")
    err = np.inf
    sweeps = 0
    # at least one sweep, so rounding drift in nearly feasible inputs never accumulates
    while err > tol and sweeps < max_sweeps:
        m /= m.sum(axis=1, keepdims=True)
        m /= m.sum(axis=0, keepdims=True)
        sweeps += 1
        err = marginal_error(m)
        if not np.isfinite(err):
            raise ProjectionError("scaling produced non-finite values")
    return SinkhornResult(m, err, sweeps, err <= tol)


def mirror_step(plan: np.ndarray, grad: np.ndarray, eta: float,
                tol: float = 1e-8, max_sweeps: int = 500) -> SinkhornResult:
    """One KL mirror-descent step: ``Proj(T * exp(-eta * grad))``.

    The constant ``exp(-1)`` factor and the global shift of the exponent are
    both diagonal scalings and vanish under the projection.
    """
    if not np.all(np.isfinite(grad)):
        raise ValueError("gradient has non-finite entries")
    expo = -eta * grad
    expo -= expo.max()
    y = plan * np.exp(expo)
    if np.any(y.sum(axis=1) <= 0) or np.any(y.sum(axis=0) <= 0):
        raise ProjectionError("multiplicative update underflowed a whole row or column; reduce eta")
    return sinkhorn_project(y, tol, max_sweeps)
