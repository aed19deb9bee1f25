"""Command-line front end: ``sigmatch {match,perturb,eval,oracle,sweep}``.

Exit codes: 0 success, 2 bad input, 3 solver failure, 4 size guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .diffusion import WaveletParams, build_dissimilarities
from .evaluation import _dump, _fmt, evaluate, node_correctness, serialize_report
from .graph import (Graph, GraphFormatError, NoiseSpec, erdos_renyi, format_edge_list, format_truth,
                    inject_noise, pad_with_dummies, parse_edge_list, parse_truth, permutation_matrix,
                    permute, random_permutation)
from .matcher import InitStrategy, MatchConfig, SolverError, sigma_match
from .oracle import MAX_ORACLE_NODES, OracleSizeError, brute_force_gw
from .transport import StepSchedule

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_GUARD = 0, 2, 3, 4


class InputError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_graph(path: str) -> Graph:
    try:
        return parse_edge_list(_read_text(path))
    except (GraphFormatError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _read_truth(path: str) -> list[tuple[str, str]]:
    try:
        return parse_truth(_read_text(path))
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _read_pairs(path: str) -> list[tuple[str, str]]:
    """Prediction file: ``u v`` lines, or the ``source,target,score`` CSV written by ``match``."""
    text = _read_text(path)
    if text.startswith("source,target"):
        rows = list(csv.reader(io.StringIO(text)))[1:]
        return [(r[0], r[1]) for r in rows if r]
    try:
        return parse_truth(text)
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _write(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _truth_permutation(pairs, g_s: Graph, g_t: Graph) -> np.ndarray | None:
    """Index permutation for a truth covering every node, else ``None``."""
    if g_s.n != g_t.n or len(pairs) != g_s.n:
        return None
    try:
        perm = [0] * g_s.n
        for u, v in pairs:
            perm[g_s.index_of(u)] = g_t.index_of(v)
    except KeyError:
        return None
    return np.array(perm) if len(set(perm)) == g_s.n else None


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=3, help="wavelet truncation order K")
    p.add_argument("--t", type=float, default=1e-3, help="propagation time")
    p.add_argument("--margin", type=float, default=1.0, help="psi_bar = max wavelet entry + margin")
    p.add_argument("--eta", type=float, default=None, help="fixed step size (overrides --eta-auto-target)")
    p.add_argument("--eta-auto-target", type=float, default=30.0,
                   help="auto step: eta * max(initial gradient) equals this")
    p.add_argument("--iters", type=int, default=100, help="maximum mirror-descent iterations")
    p.add_argument("--sinkhorn-tol", type=float, default=1e-8, help="marginal tolerance of each projection")
    p.add_argument("--sinkhorn-sweeps", type=int, default=500, help="maximum sweeps per projection")
    p.add_argument("--stop-tol", type=float, default=1e-7, help="stop when max plan change drops below this")
    p.add_argument("--init", default="uniform",
                   help="uniform | degree | truth (needs --truth) | file:PATH (whitespace matrix)")
    p.add_argument("--temperature", type=float, default=1.0, help="softmax temperature for --init degree")
    p.add_argument("--extract", choices=("argmax", "bijection"), default="argmax",
                   help="correspondence extraction rule")
    p.add_argument("--marginals", choices=("ones", "weights"), default="ones", help="gradient marginals")


def _config_from_args(args, init: InitStrategy) -> MatchConfig:
    if args.eta is not None:
        step = StepSchedule(mode="fixed", eta=args.eta)
    else:
        step = StepSchedule(mode="auto", target=args.eta_auto_target)
    return MatchConfig(
        wavelet=WaveletParams(t=args.t, K=args.k, margin=args.margin),
        iters=args.iters, step=step, sinkhorn_tol=args.sinkhorn_tol,
        sinkhorn_sweeps=args.sinkhorn_sweeps, stop_tol=args.stop_tol, init=init,
        extraction=args.extract, marginal_mode=args.marginals)


def cmd_match(args) -> int:
    g_s, g_t = _read_graph(args.source), _read_graph(args.target)
    truth = _read_truth(args.truth) if args.truth else None
    n = max(g_s.n, g_t.n)
    p_s, p_t = pad_with_dummies(g_s, n), pad_with_dummies(g_t, n)
    truth_perm = _truth_permutation(truth, p_s, p_t) if truth else None

    choice = args.init
    if choice in ("uniform", "degree"):
        init = InitStrategy(kind=choice, temperature=args.temperature)
    elif choice == "truth":
        if truth_perm is None:
            raise InputError("--init truth needs a --truth file covering every node")
        init = InitStrategy(kind="plan", matrix=permutation_matrix(truth_perm))
    elif choice.startswith("file:"):
        path = choice[len("file:"):]
        if not Path(path).is_file():
            raise InputError(f"cannot read {path}: no such file")
        init = InitStrategy(kind="file", path=path)
    else:
        raise InputError(f"unknown --init value {choice!r}")
    try:
        cfg = _config_from_args(args, init)
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    try:
        result = sigma_match(cfg, g_s, g_t, truth=truth_perm)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    report = evaluate(result, truth, result.csi_trace[-1] if result.csi_trace else None)
    config = cfg.to_dict()
    config["seed"] = args.seed
    _write(args.out, serialize_report(result, report, "json", config))
    if args.csv:
        _write(args.csv, serialize_report(result, report, "csv"))
    obj = result.objective_trace[-1] if result.objective_trace else result.initial_objective
    nc = "n/a" if report.nc is None else f"{report.nc:.6f}"
    summary = f"nc={nc} objective={obj:.6g} iterations={result.iterations_run}"
    print(summary, file=sys.stderr if args.out == "-" else sys.stdout)
    return EXIT_OK


def cmd_perturb(args) -> int:
    g = _read_graph(args.input)
    source_labels = g.labels
    truth = list(zip(source_labels, source_labels))
    if args.permute:
        g, perm = permute(g, random_permutation(g.n, args.seed))
        truth = [(u, g.labels[int(perm[i])]) for i, u in enumerate(source_labels)]
    try:
        g = inject_noise(g, NoiseSpec(args.q, args.seed))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    Path(args.out_graph).write_text(format_edge_list(g))
    Path(args.out_truth).write_text(format_truth(truth))
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = _read_pairs(args.pred)
    truth = _read_truth(args.truth)
    try:
        nc = node_correctness(pred, truth)
    except ValueError as exc:
        raise InputError(f"{args.truth}: {exc}") from exc
    print(f"{nc:.6f}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    g_s, g_t = _read_graph(args.source), _read_graph(args.target)
    n = max(g_s.n, g_t.n)
    if n > MAX_ORACLE_NODES:
        print(f"oracle refused: {n} nodes exceeds the limit of {MAX_ORACLE_NODES}", file=sys.stderr)
        return EXIT_GUARD
    g_s, g_t = pad_with_dummies(g_s, n), pad_with_dummies(g_t, n)
    d = build_dissimilarities(g_s, g_t, WaveletParams(t=args.t, K=args.k, margin=args.margin))
    try:
        res = brute_force_gw(d)
    except OracleSizeError as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    out = {
        "best_perm": [[g_s.labels[i], g_t.labels[j]] for i, j in enumerate(res.best_perm)],
        "best_perm_indices": list(res.best_perm),
        "objective": res.best_objective,
        "unique": res.unique,
        "evaluated_count": res.evaluated_count,
    }
    _write(args.out, (_dump(out) + "\n").encode())
    return EXIT_OK


# sweep ---------------------------------------------------------------------

SWEEP_DEFAULTS = {
    "q": "", "seeds": "0", "generator": "erdos_renyi", "nodes": "100", "p": "0.05",
    "generator_seed": "0", "graph": "", "permute": "true", "init": "uniform",
    "temperature": "1.0", "k": "3", "t": "1e-3", "margin": "1.0", "eta": "",
    "eta_auto_target": "30", "iters": "100", "sinkhorn_tol": "1e-8", "sinkhorn_sweeps": "500",
    "stop_tol": "1e-7", "extract": "argmax", "marginals": "ones", "workers": "1",
}
SWEEP_HEADER = ["q", "seed", "nc", "objective", "iterations"]


def parse_sweep_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment line; unknown keys are errors."""
    cfg = dict(SWEEP_DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"sweep config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SWEEP_DEFAULTS:
            raise InputError(f"sweep config line {lineno}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.replace(",", " ").split()]


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.replace(",", " ").split()]


def _bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _sweep_cell(base: Graph, q: float, seed: int, cfg: dict[str, str]) -> tuple[list, float]:
    start = time.perf_counter()
    if _bool(cfg["permute"]):
        target, perm = permute(base, random_permutation(base.n, seed))
    else:
        target, perm = base, np.arange(base.n)
    target = inject_noise(target, NoiseSpec(q, seed))
    truth_pairs = [(base.labels[i], target.labels[int(perm[i])]) for i in range(base.n)]

    kind = cfg["init"]
    temperature = float(cfg["temperature"])
    if kind in ("uniform", "degree"):
        init = InitStrategy(kind=kind, temperature=temperature)
    elif kind in ("truth", "near_truth"):
        exact = permutation_matrix(perm)
        mat = exact if kind == "truth" else 0.9 * exact + 0.1 / base.n
        init = InitStrategy(kind="plan", matrix=mat)
    else:
        raise ValueError(f"unknown init {kind!r}")
    step = (StepSchedule(mode="fixed", eta=float(cfg["eta"])) if cfg["eta"]
            else StepSchedule(mode="auto", target=float(cfg["eta_auto_target"])))
    mc = MatchConfig(
        wavelet=WaveletParams(t=float(cfg["t"]), K=int(cfg["k"]), margin=float(cfg["margin"])),
        iters=int(cfg["iters"]), step=step, sinkhorn_tol=float(cfg["sinkhorn_tol"]),
        sinkhorn_sweeps=int(cfg["sinkhorn_sweeps"]), stop_tol=float(cfg["stop_tol"]),
        init=init, extraction=cfg["extract"], marginal_mode=cfg["marginals"])
    result = sigma_match(mc, base, target)
    nc = node_correctness(result.correspondence, truth_pairs)
    obj = result.objective_trace[-1]
    row = [_fmt(q), str(seed), _fmt(nc), _fmt(obj), str(result.iterations_run)]
    return row, time.perf_counter() - start


def _sweep_base_graph(cfg: dict[str, str], root: Path) -> Graph:
    if cfg["generator"] == "erdos_renyi":
        return erdos_renyi(int(cfg["nodes"]), float(cfg["p"]), int(cfg["generator_seed"]))
    if cfg["generator"] == "file":
        if not cfg["graph"]:
            raise InputError("generator = file needs a graph path")
        return _read_graph(str(root / cfg["graph"]))
    raise InputError(f"unknown generator {cfg['generator']!r}")


def cmd_sweep(args) -> int:
    cfg = parse_sweep_config(_read_text(args.config))
    try:
        qs, seeds = _floats(cfg["q"]), _ints(cfg["seeds"])
        workers = int(cfg["workers"])
        _bool(cfg["permute"])
    except ValueError as exc:
        raise InputError(f"{args.config}: {exc}") from exc
    base = _sweep_base_graph(cfg, Path(args.config).resolve().parent)
    cells = sorted((q, s) for q in qs for s in seeds)
    try:
        if workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_sweep_cell, base, q, s, cfg) for q, s in cells]
                outcomes = [f.result() for f in futures]
        else:
            outcomes = [_sweep_cell(base, q, s, cfg) for q, s in cells]
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        raise InputError(f"{args.config}: {exc}") from exc

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row, _ in outcomes:
        writer.writerow(row)
    _write(args.out, buf.getvalue().encode())
    if args.timings:
        tbuf = io.StringIO()
        tw = csv.writer(tbuf, lineterminator="\n")
        tw.writerow(["q", "seed", "runtime_s"])
        for (q, s), (_, secs) in zip(cells, outcomes):
            tw.writerow([_fmt(q), s, f"{secs:.6f}"])
        Path(args.timings).write_text(tbuf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="sigmatch", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="match two edge-list graphs", formatter_class=fmt)
    p.add_argument("--source", required=True, help="source edge list")
    p.add_argument("--target", required=True, help="target edge list")
    _add_solver_flags(p)
    p.add_argument("--truth", default=None, help="ground-truth pairs 'u v' for NC and CSI diagnostics")
    p.add_argument("--out", default="-", help="JSON report path ('-' for stdout)")
    p.add_argument("--csv", default=None, help="also write the correspondence as CSV")
    p.add_argument("--seed", type=int, default=0, help="recorded in the report; the solver is deterministic")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("perturb", help="permute a graph and add q|E| noise edges", formatter_class=fmt)
    p.add_argument("--input", required=True, help="input edge list")
    p.add_argument("--q", type=float, default=0.0, help="noise edges to add, as a fraction of |E|")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (PCG64)")
    p.add_argument("--permute", action="store_true", help="randomly relabel the nodes")
    p.add_argument("--out-graph", required=True, help="output edge list")
    p.add_argument("--out-truth", required=True, help="output ground-truth pairs")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("eval", help="node correctness of a predicted correspondence", formatter_class=fmt)
    p.add_argument("--pred", required=True, help="predicted pairs ('u v' lines or match CSV)")
    p.add_argument("--truth", required=True, help="ground-truth pairs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="exhaustive GW minimum over permutations (V <= 8)",
                       formatter_class=fmt)
    p.add_argument("--source", required=True, help="source edge list")
    p.add_argument("--target", required=True, help="target edge list")
    p.add_argument("--k", type=int, default=3, help="wavelet truncation order K")
    p.add_argument("--t", type=float, default=1e-3, help="propagation time")
    p.add_argument("--margin", type=float, default=1.0, help="psi_bar = max wavelet entry + margin")
    p.add_argument("--out", default="-", help="JSON output path ('-' for stdout)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="noise sweep over (q, seed) cells", formatter_class=fmt)
    p.add_argument("--config", required=True, help="key = value sweep configuration")
    p.add_argument("--out", default="-", help="CSV output path ('-' for stdout)")
    p.add_argument("--timings", default=None, help="optional CSV of per-cell wall-clock runtimes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
