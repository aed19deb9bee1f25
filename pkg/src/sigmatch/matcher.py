"""End-to-end matching: costs, mirror-descent loop and correspondence extraction."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .diffusion import WaveletParams, build_dissimilarities
from .graph import Graph, degrees, pad_with_dummies, validate_permutation
from .inconsistency import csi
from .transport import (MarginalMode, ProjectionError, StepSchedule, gw_gradient, gw_objective,
                        marginals, mirror_step, sinkhorn_project)

Extraction = Literal["argmax", "bijection"]


class SolverError(RuntimeError):
    """The optimization could not proceed (projection failure, non-finite values)."""


@dataclass(frozen=True)
class InitStrategy:
    """Starting plan.

    ``kind`` is one of ``uniform``, ``degree`` (softmax of negative degree
    differences, scaled by ``temperature``), ``file`` (a whitespace-separated
    ``V x V`` matrix at ``path``) or ``plan`` (an in-memory ``matrix``).
    """

    kind: Literal["uniform", "degree", "file", "plan"] = "uniform"
    path: str | None = None
    temperature: float = 1.0
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("uniform", "degree", "file", "plan"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ValueError("file init needs a path")
        if self.kind == "plan" and self.matrix is None:
            raise ValueError("plan init needs a matrix")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class MatchConfig:
    wavelet: WaveletParams = field(default_factory=WaveletParams)
    iters: int = 100
    step: StepSchedule = field(default_factory=StepSchedule)
    sinkhorn_tol: float = 1e-8
    sinkhorn_sweeps: int = 500
    stop_tol: float = 1e-7
    init: InitStrategy = field(default_factory=InitStrategy)
    extraction: Extraction = "argmax"
    marginal_mode: MarginalMode = "ones"

    def __post_init__(self):
        if self.iters < 1:
            raise ValueError("iters must be at least 1")
        if not (self.sinkhorn_tol > 0 and self.stop_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.sinkhorn_sweeps < 1:
            raise ValueError("sinkhorn_sweeps must be at least 1")
        if self.extraction not in ("argmax", "bijection"):
            raise ValueError(f"unknown extraction mode {self.extraction!r}")
        if self.marginal_mode not in ("ones", "weights"):
            raise ValueError(f"unknown marginal mode {self.marginal_mode!r}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["init"].pop("matrix", None)
        return out


@dataclass
class MatchResult:
    correspondence: list[tuple[str, str]]
    index_pairs: list[tuple[int, int]]
    scores: list[float]
    plan: np.ndarray
    objective_trace: list[float]
    displacement_trace: list[float]
    iterations_run: int
    marginal_error: float
    eta: float
    dummies_added: int
    timings_ms: dict[str, float]
    initial_objective: float
    csi_trace: list[np.ndarray] = field(default_factory=list)


def load_plan_file(path: str | Path) -> np.ndarray:
    try:
        mat = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read plan file {path}: {exc}") from exc
    return mat


def _validated_projection(mat: np.ndarray, n: int, cfg: MatchConfig) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (n, n):
        raise ValueError(f"initial plan has shape {mat.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(mat)) or np.any(mat < 0):
        raise ValueError("initial plan must be finite and non-negative")
    res = sinkhorn_project(mat, cfg.sinkhorn_tol, cfg.sinkhorn_sweeps)
    return res.plan


def init_plan(strategy: InitStrategy, g_s: Graph, g_t: Graph, cfg: MatchConfig | None = None) -> np.ndarray:
    cfg = cfg or MatchConfig()
    if g_s.n != g_t.n:
        raise ValueError("graphs must have equal size; pad first")
    n = g_s.n
    if strategy.kind == "uniform":
        return np.full((n, n), 1.0 / n)
    if strategy.kind == "degree":
        gap = np.abs(degrees(g_s)[:, None] - degrees(g_t)[None, :]) / strategy.temperature
        logits = -gap + gap.min(axis=1, keepdims=True)
        soft = np.exp(logits)
        soft /= soft.sum(axis=1, keepdims=True)
        return sinkhorn_project(soft, cfg.sinkhorn_tol, cfg.sinkhorn_sweeps).plan
    if strategy.kind == "file":
        return _validated_projection(load_plan_file(strategy.path), n, cfg)
    return _validated_projection(strategy.matrix, n, cfg)


def extract_correspondence(plan: np.ndarray, mode: Extraction = "argmax") -> list[tuple[int, int]]:
    """Hard correspondence from a plan.

    ``argmax`` takes each row's largest entry (lowest index on ties) and may
    map two sources to one target.  ``bijection`` repeatedly takes the
    largest remaining entry and deletes its row and column.
    """
    n = plan.shape[0]
    if mode == "argmax":
        return [(i, int(np.argmax(plan[i]))) for i in range(n)]
    if mode != "bijection":
        raise ValueError(f"unknown extraction mode {mode!r}")
    # stable sort on negated values: ties resolve to the lowest flat index
    order = np.argsort(-plan, axis=None, kind="stable")
    used_r = np.zeros(n, bool)
    used_c = np.zeros(n, bool)
    pairs = {}
    for flat in order:
        r, c = divmod(int(flat), n)
        if used_r[r] or used_c[c]:
            continue
        used_r[r] = used_c[c] = True
        pairs[r] = c
        if len(pairs) == n:
            break
    return [(r, pairs[r]) for r in range(n)]


def sigma_match(cfg: MatchConfig, g_s: Graph, g_t: Graph, truth=None) -> MatchResult:
    """Run the full pipeline on two graphs.

    ``truth`` (optional) is a permutation in padded index space; when given,
    CSI under the current plan is recorded after every iteration.
    """
    n = max(g_s.n, g_t.n)
    dummies_added = 2 * n - g_s.n - g_t.n
    g_s, g_t = pad_with_dummies(g_s, n), pad_with_dummies(g_t, n)
    if truth is not None:
        truth = validate_permutation(truth, n)

    start = time.perf_counter()
    d = build_dissimilarities(g_s, g_t, cfg.wavelet)
    wavelet_ms = 1e3 * (time.perf_counter() - start)

    start = time.perf_counter()
    if cfg.marginal_mode == "ones":
        mu_s = mu_t = None
    else:
        mu_s, mu_t = marginals(g_s, "weights"), marginals(g_t, "weights")
    try:
        plan = init_plan(cfg.init, g_s, g_t, cfg)
    except ProjectionError as exc:
        raise SolverError(f"initial plan cannot be projected: {exc}") from exc

    initial_objective = gw_objective(d, plan)
    grad = gw_gradient(d, plan, mu_s, mu_t)
    eta = cfg.step.resolve(grad)
    objectives, displacements, csi_trace = [], [], []
    err = float("nan")
    iterations = 0
    for _ in range(cfg.iters):
        try:
            step = mirror_step(plan, grad, eta, cfg.sinkhorn_tol, cfg.sinkhorn_sweeps)
        except (ProjectionError, ValueError) as exc:
            raise SolverError(f"iteration {iterations + 1}: {exc}") from exc
        new = step.plan
        err = step.marginal_error
        obj = gw_objective(d, new)
        if not np.isfinite(obj):
            raise SolverError(f"iteration {iterations + 1}: objective is not finite")
        displacement = float(np.max(np.abs(new - plan)))
        plan = new
        iterations += 1
        objectives.append(obj)
        displacements.append(displacement)
        if truth is not None:
            csi_trace.append(csi(d, plan, truth))
        if displacement < cfg.stop_tol:
            break
        grad = gw_gradient(d, plan, mu_s, mu_t)
    solve_ms = 1e3 * (time.perf_counter() - start)

    pairs = [(i, j) for i, j in extract_correspondence(plan, cfg.extraction) if i not in g_s.dummies]
    return MatchResult(
        correspondence=[(g_s.labels[i], g_t.labels[j]) for i, j in pairs],
        index_pairs=pairs,
        scores=[float(plan[i, j]) for i, j in pairs],
        plan=plan,
        objective_trace=objectives,
        displacement_trace=displacements,
        iterations_run=iterations,
        marginal_error=err,
        eta=eta,
        dummies_added=dummies_added,
        timings_ms={"wavelet": wavelet_ms, "solve": solve_ms},
        initial_objective=initial_objective,
        csi_trace=csi_trace,
    )
