"""Node correctness, CSI summaries and report serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .matcher import MatchResult


@dataclass
class EvalReport:
    nc: float | None = None
    matched_count: int = 0
    truth_count: int = 0
    csi_stats: dict[str, float] | None = None
    objective_trace: list[float] = field(default_factory=list)
    displacement_trace: list[float] = field(default_factory=list)


def node_correctness(pred: Iterable[Sequence], truth: Iterable[Sequence]) -> float:
    """Fraction of ground-truth pairs present in the prediction."""
    return _nc_counts(pred, truth)[0]


def _nc_counts(pred, truth) -> tuple[float, int, int]:
    truth = [(str(u), str(v)) for u, v in truth]
    if not truth:
        raise ValueError("ground truth is empty")
    sources = [u for u, _ in truth]
    if len(set(sources)) != len(sources):
        raise ValueError("ground truth lists a source node more than once")
    hits = len({(str(u), str(v)) for u, v in pred} & set(truth))
    return hits / len(truth), hits, len(truth)


def csi_summary(values: np.ndarray) -> dict[str, float]:
    values = np.asarray(values, dtype=float)
    return {"min": float(values.min()), "mean": float(values.mean()), "max": float(values.max())}


def evaluate(result: MatchResult, truth=None, csi_values=None) -> EvalReport:
    report = EvalReport(objective_trace=list(result.objective_trace),
                        displacement_trace=list(result.displacement_trace))
    if truth is not None:
        report.nc, report.matched_count, report.truth_count = _nc_counts(result.correspondence, truth)
    if csi_values is not None:
        report.csi_stats = csi_summary(csi_values)
    return report


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        # JSON has no literal for these
        return "null"
    # shortest repr that round-trips exactly
    return repr(float(x))


def _dump(obj) -> str:
    """Deterministic JSON with round-trip float formatting and sorted keys."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_dump(obj[k])}" for k in sorted(obj)) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_dict(result: MatchResult, report: EvalReport, config: dict | None = None) -> dict:
    out = {
        "config": config or {},
        "nc": report.nc,
        "correspondence": [[u, v] for u, v in result.correspondence],
        "objective_trace": list(result.objective_trace),
        "displacement_trace": list(result.displacement_trace),
        "marginal_error": result.marginal_error,
        "iterations": result.iterations_run,
        "timings_ms": dict(result.timings_ms),
        "padding": {"dummies_added": result.dummies_added},
    }
    if report.csi_stats is not None:
        out["csi_stats"] = report.csi_stats
    return out


def serialize_report(result: MatchResult, report: EvalReport, fmt: str = "json",
                     config: dict | None = None) -> bytes:
    if fmt == "json":
        return (_dump(report_dict(result, report, config)) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["source", "target", "score"])
        for (u, v), s in zip(result.correspondence, result.scores):
            writer.writerow([u, v, _fmt(s)])
        return buf.getvalue().encode()
    raise ValueError(f"unsupported report format {fmt!r}")
