"""Command-line interface: ``depthbandit {depth,median,topk,rank,generate,experiment}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  Machine output
goes to the ``--out`` file (JSON, or CSV for ``generate``); stdout gets a
one-line summary.  Without ``--out`` the JSON document is printed instead.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import experiments
from .bandit import BanditConfig, CoarseRank, Median, TopK, meta_run
from .depth import InstanceTooLargeError, mc_estimate, naive_counts, planar_counts, planar_e_cost, round_rng
from .geometry import PointSet

THREADS_ENV = "DEPTHBANDIT_THREADS"

RESULT_SCHEMA = {
    "type": "object",
    "required": ["task", "config", "answer", "per_point", "total_cost_units", "rounds", "wall_time_ms"],
    "properties": {
        "task": {"enum": ["depth", "median", "topk", "coarse_rank"]},
        "config": {"type": "object", "required": ["seed"]},
        "per_point": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "mu_hat", "pulls", "exact"],
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "mu_hat": {"type": "number", "minimum": 0, "maximum": 1},
                    "pulls": {"type": "integer", "minimum": 0},
                    "exact": {"type": "boolean"},
                },
            },
        },
        "total_cost_units": {"type": "number", "minimum": 0},
        "rounds": {"type": "integer", "minimum": 0},
        "wall_time_ms": {"type": "number", "minimum": 0},
    },
}


class DatasetError(ValueError):
    pass


def validate_result(doc):
    """Raise ``jsonschema.ValidationError`` if ``doc`` is not a well-formed result file."""
    import jsonschema

    jsonschema.validate(doc, RESULT_SCHEMA)


def worker_count():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        k = int(raw)
    except ValueError:
        raise DatasetError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return os.cpu_count() or 1 if k <= 0 else k


def load_points(path, header=False) -> PointSet:
    """Read a CSV of one point per row; errors name the offending line."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            vals = []
            for cell in row:
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(f"{path}:{lineno}: cannot parse {cell.strip()!r} as a number")
                if not math.isfinite(v):
                    raise DatasetError(f"{path}:{lineno}: non-finite value {cell.strip()!r}")
                vals.append(v)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DatasetError(f"{path}:{lineno}: expected {width} columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    try:
        return PointSet(np.array(rows))
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}")


def _sha256(points):
    return hashlib.sha256(np.ascontiguousarray(points.data).tobytes()).hexdigest()


def _emit(args, doc, summary):
    validate_result(doc)
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(summary)
    else:
        print(text)


def _delta(raw):
    v = float(raw)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in (0, 1), got {raw}")
    return v


def _nonneg(raw):
    v = float(raw)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {raw}")
    return v


def _positive(raw):
    v = float(raw)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {raw}")
    return v


def _unit_interval(raw):
    v = float(raw)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {raw}")
    return v


# -- commands ---------------------------------------------------------------

def cmd_depth(args, parser):
    points = load_points(args.input, args.header)
    if args.index is not None:
        if not 0 <= args.index < points.n:
            parser.error(f"--index must lie in [0, {points.n})")
        idx = np.array([args.index])
    else:
        idx = np.arange(points.n)
    if args.method == "planar" and points.d != 2:
        parser.error(f"--method planar needs 2-dimensional data, got d={points.d}")
    if args.method == "mc" and (args.samples is None or args.samples <= 0):
        parser.error("samples must be positive")
    start = time.perf_counter()
    config = {"input": args.input, "data_sha256": _sha256(points), "n": points.n, "d": points.d,
              "method": args.method, "indices": idx.tolist(), "seed": args.seed}
    half_width = None
    if args.method == "naive":
        hits, total = naive_counts(points, idx)
        samples, exact, cost = total, True, float(total) * idx.size
        means = hits / total
    elif args.method == "planar":
        hits, total = planar_counts(points, idx)
        samples, exact, cost = total, True, planar_e_cost(points.n) * idx.size
        means = hits / total
    else:
        counts = mc_estimate(points, idx, args.samples, round_rng(args.seed, 1), workers=worker_count())
        samples, exact, cost = args.samples, False, float(args.samples) * idx.size
        means = counts / args.samples
        half_width = math.sqrt(math.log(2 / args.delta) / (2 * args.samples))
        config.update(samples=args.samples, delta=args.delta)
    per_point = []
    for i, m in zip(idx.tolist(), means.tolist()):
        entry = {"index": i, "mu_hat": m, "pulls": int(samples), "exact": exact}
        if half_width is not None:
            entry["half_width"] = half_width
        per_point.append(entry)
    doc = {
        "task": "depth",
        "config": config,
        "answer": means.tolist(),
        "per_point": per_point,
        "total_cost_units": cost,
        "rounds": 1,
        "wall_time_ms": (time.perf_counter() - start) * 1e3,
    }
    best = int(idx[np.argmax(means)])
    _emit(args, doc, f"depth[{args.method}]: {idx.size} point(s), deepest index {best} "
                     f"(depth {means.max():.6f})")
    return 0


def _run_task(args, parser, task):
    points = load_points(args.input, args.header)
    if isinstance(task, TopK) and not 1 <= task.k < points.n:
        parser.error(f"--k must satisfy 1 <= k < n = {points.n}")
    if isinstance(task, str):  # boundaries still need n
        try:
            bounds = tuple(points.n if tok.strip() == "n" else int(tok) for tok in task.split(","))
        except ValueError:
            parser.error(f"malformed --boundaries {task!r}")
        if bounds[0] != 0 or bounds[-1] != points.n or any(b <= a for a, b in zip(bounds, bounds[1:])) \
                or len(bounds) < 2:
            parser.error(f"--boundaries must increase strictly from 0 to n = {points.n}")
        task = CoarseRank(bounds)
    cfg = BanditConfig(delta=args.delta, epsilon=args.epsilon, c_t=args.ct,
                       switch_factor=args.switch_factor, task=task, seed=args.seed, e_cost=args.e_cost)
    start = time.perf_counter()
    rep = meta_run(points, cfg, workers=worker_count())
    wall = (time.perf_counter() - start) * 1e3
    config = {"input": args.input, "data_sha256": _sha256(points), "n": points.n, "d": points.d,
              "delta": cfg.delta, "epsilon": cfg.epsilon, "c_t": cfg.c_t,
              "switch_factor": cfg.switch_factor, "seed": cfg.seed, "e_cost": rep.e_cost}
    if isinstance(task, TopK):
        config["k"] = task.k
    if isinstance(task, CoarseRank):
        config["boundaries"] = list(task.boundaries)
    per_point = [{"index": i, "mu_hat": float(rep.estimates[i]), "pulls": int(rep.pulls[i]),
                  "exact": bool(rep.exact_computed[i])} for i in range(points.n)]
    doc = {
        "task": rep.task,
        "config": config,
        "answer": rep.answer,
        "per_point": per_point,
        "total_cost_units": rep.total_cost_units,
        "rounds": rep.rounds,
        "wall_time_ms": wall,
    }
    if isinstance(task, Median):
        head = f"median index {rep.answer}"
    elif isinstance(task, TopK):
        head = f"top-{task.k} indices {rep.answer}"
    else:
        head = f"{len(task.boundaries) - 1} clusters"
    _emit(args, doc, f"{head}; rounds {rep.rounds}, exact {int(rep.exact_computed.sum())}, "
                     f"cost {rep.total_cost_units:.0f} units")
    return 0


def cmd_median(args, parser):
    return _run_task(args, parser, Median())


def cmd_topk(args, parser):
    return _run_task(args, parser, TopK(args.k))


def cmd_rank(args, parser):
    return _run_task(args, parser, args.boundaries)


def cmd_generate(args, parser):
    if args.n < args.d + 2:
        parser.error(f"--n must be at least d + 2 = {args.d + 2}")
    rng = np.random.default_rng(args.seed)
    data = rng.standard_normal((args.n, args.d))
    if args.out:
        np.savetxt(args.out, data, fmt="%.17g", delimiter=",")
        print(f"wrote {args.n} x {args.d} {args.dist} points to {args.out}")
    else:
        np.savetxt(sys.stdout, data, fmt="%.17g", delimiter=",")
    return 0


def cmd_experiment(args, parser):
    ns = [int(v) for v in args.ns.split(",")] if args.ns else None
    cfg = BanditConfig(delta=args.delta, c_t=args.ct, seed=args.seed)
    workers = worker_count()
    suite = args.suite
    if suite == "gap-cdf":
        summary, cols = experiments.gap_cdf(args.n or 200, args.d, args.instances or 10, args.seed,
                                            args.source, cfg, workers)
    elif suite == "pulls-vs-gap":
        summary, cols = experiments.pulls_vs_gap(args.n or 2000, args.d, args.trials or 50, args.seed,
                                                 cfg, workers)
    elif suite == "scaling":
        summary, cols = experiments.scaling(tuple(ns or (500, 1000, 2000, 4000)), args.d,
                                            args.trials or 3, args.seed, cfg, workers)
    else:
        summary, cols = experiments.error_rate(args.n or 100, args.d, args.trials or 200, args.seed, cfg,
                                               args.oracle, not args.unpaired, workers)
    doc = {"suite": suite, "config": {k: v for k, v in vars(args).items() if k not in ("func", "out", "csv")},
           "summary": summary, "columns": cols}
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if args.csv:
        names = list(cols)
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            w.writerows(zip(*(cols[k] for k in names)))
    stats = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items())
    print(f"{suite}: {stats}" if args.out or args.csv else text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="depthbandit", description="Adaptive simplicial depth via bandits")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("input", help="CSV file, one point per row")
        p.add_argument("--header", action="store_true", help="skip the first line")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the JSON result here")

    def bandit_args(p):
        p.add_argument("--delta", type=_delta, default=0.05, help="error probability in (0, 1)")
        p.add_argument("--epsilon", type=_nonneg, default=0.0, help="additive slack; 0 for exact identification")
        p.add_argument("--ct", type=_positive, default=1.0, help="sample schedule scale (0.1 = practical mode)")
        p.add_argument("--switch-factor", type=_unit_interval, default=1.0,
                       help="switch to exact computation once t_r > factor * e_cost")
        p.add_argument("--e-cost", type=_positive, default=None, help="override the exact computation cost")

    p = sub.add_parser("depth", help="depth of one or all points")
    data_args(p)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--index", type=int)
    which.add_argument("--all", action="store_true")
    p.add_argument("--method", choices=("naive", "planar", "mc"), default="naive")
    p.add_argument("--samples", type=int, help="simplices to draw for --method mc")
    p.add_argument("--delta", type=_delta, default=0.05, help="level of the reported Hoeffding half-width")
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("median", help="adaptive simplicial median")
    data_args(p)
    bandit_args(p)
    p.set_defaults(func=cmd_median)

    p = sub.add_parser("topk", help="adaptive deepest-k points")
    data_args(p)
    bandit_args(p)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("rank", help="adaptive coarse ranking into depth clusters")
    data_args(p)
    bandit_args(p)
    p.add_argument("--boundaries", required=True, help="comma list m_0=0 < ... < m_l=n; 'n' allowed")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("generate", help="write a synthetic data set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--dist", choices=("gaussian",), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="run an experiment suite")
    p.add_argument("--suite", choices=experiments.SUITES, required=True)
    p.add_argument("--n", type=int, help="points per instance")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, help="runs (pulls-vs-gap, error-rate) or runs per n (scaling)")
    p.add_argument("--instances", type=int, help="data sets for gap-cdf")
    p.add_argument("--ns", help="comma list of n for scaling")
    p.add_argument("--delta", type=_delta, default=0.05)
    p.add_argument("--ct", type=_positive, default=None,
                   help="schedule scale; defaults to 1 for error-rate and 0.1 otherwise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", choices=("exact", "adaptive"), default="exact", help="gap source for gap-cdf")
    p.add_argument("--oracle", choices=("naive", "planar"), default="naive", help="ground truth for error-rate")
    p.add_argument("--unpaired", action="store_true", help="error-rate: fresh data set for every run")
    p.add_argument("--out", help="JSON report")
    p.add_argument("--csv", help="CSV of the plot-ready columns")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment" and args.ct is None:
        args.ct = 1.0 if args.suite == "error-rate" else 0.1
    try:
        return args.func(args, parser)
    except (DatasetError, InstanceTooLargeError, OSError) as exc:
        print(f"depthbandit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
