"""Seeded experiment suites behind ``depthbandit experiment``.

Each suite returns ``(summary, columns)``: a flat dict of statistics and a
dict of equal-length lists ready to be written as CSV columns.  Instances
and runs draw their seeds from ``(seed, instance, run)`` only, so output is
fixed by the arguments.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import analysis
from .bandit import BanditConfig, adaptive_median
from .depth import exact_depths

SUITES = ("pulls-vs-gap", "gap-cdf", "scaling", "error-rate")


def child_seed(seed, *keys):
    return int(np.random.SeedSequence([int(seed) % 2**63, *keys]).generate_state(1, np.uint64)[0])


def gap_cdf(n=200, d=2, instances=10, seed=0, source="exact", cfg=None, workers=1):
    """Pooled gap CDF over ``instances`` Gaussian data sets and its power-law fit.

    ``source="adaptive"`` uses gaps from the adaptive median's final
    estimates instead of exact depths.
    """
    if source not in ("exact", "adaptive"):
        raise ValueError(f"unknown gap source {source!r}")
    cfg = cfg or BanditConfig(c_t=0.1)
    profiles, top_depths = [], []
    for i in range(instances):
        pts = analysis.gaussian_points(n, d, child_seed(seed, i))
        if source == "exact":
            depths = exact_depths(pts)
            profiles.append(analysis.gap_profile(depths))
        else:
            rep = adaptive_median(pts, replace(cfg, seed=child_seed(seed, i, 1)), workers)
            depths = rep.estimates
            profiles.append(analysis.gap_profile(rep))
        top_depths.append(float(depths.max()))
    pooled = analysis.pool_profiles(profiles)
    fit = analysis.fit_power_law(pooled)
    g, F = analysis.empirical_cdf(pooled)
    summary = {
        "alpha": fit.alpha,
        "r_squared": fit.r_squared,
        "n_points_used": fit.n_points_used,
        "mean_max_gap": float(np.mean([p.gaps[-1] for p in profiles])),
        "mean_max_depth": float(np.mean(top_depths)),
        "source": pooled.source,
    }
    return summary, {"gap": g.tolist(), "empirical_cdf": F.tolist()}


def pulls_vs_gap(n=2000, d=2, trials=50, seed=0, cfg=None, workers=1):
    """Average pulls per point over ``trials`` runs on one instance against exact gaps."""
    cfg = cfg or BanditConfig(c_t=0.1)
    pts = analysis.gaussian_points(n, d, child_seed(seed, 0))
    depths = exact_depths(pts)
    gaps = depths.max() - depths
    reports = [adaptive_median(pts, replace(cfg, seed=child_seed(seed, 0, t)), workers)
               for t in range(trials)]
    reg = analysis.pulls_vs_gap(reports, gaps)
    pulls = np.mean([r.pulls for r in reports], axis=0)
    exact = np.any([r.exact_computed for r in reports], axis=0)
    with np.errstate(divide="ignore"):
        inv = np.where(gaps > 0, gaps ** -2.0, np.inf)
    summary = {
        "slope": reg.slope,
        "intercept": reg.intercept,
        "r_squared": reg.r_squared,
        "n_used": reg.n_used,
        "n_excluded": reg.n_excluded,
        "e_cost": reports[0].e_cost,
        "errors": int(sum(r.answer != int(np.argmax(depths)) for r in reports)),
    }
    columns = {
        "index": list(range(n)),
        "gap": gaps.tolist(),
        "inv_gap_sq": [float(v) if np.isfinite(v) else None for v in inv],
        "mean_pulls": pulls.tolist(),
        "exact": [bool(e) for e in exact],
    }
    return summary, columns


def scaling(ns=(500, 1000, 2000, 4000), d=2, trials=3, seed=0, cfg=None, workers=1):
    """Adaptive cost against ``n`` next to the exhaustive planar and naive baselines."""
    cfg = cfg or BanditConfig(c_t=0.1)
    cfg = replace(cfg, seed=child_seed(seed, 1))
    curve = analysis.scaling_curve(
        lambda n, t: analysis.gaussian_points(n, d, child_seed(seed, n, t)), ns, cfg, trials, workers)
    planar = [analysis.exhaustive_cost(n, d, "planar") for n in curve.ns]
    naive = [analysis.exhaustive_cost(n, d, "naive") for n in curve.ns]
    summary = {
        "adaptive_slope": curve.slope,
        "planar_slope": analysis.loglog_slope(curve.ns, planar),
        "naive_slope": analysis.loglog_slope(curve.ns, naive),
    }
    columns = {"n": list(curve.ns), "adaptive_cost": list(curve.costs),
               "planar_cost": planar, "naive_cost": naive}
    return summary, columns


def error_rate(n=100, d=2, trials=200, seed=0, cfg=None, oracle="naive", paired=True, workers=1):
    """Failure fraction of the adaptive median against an exact oracle.

    With ``paired`` the runs come in pairs sharing a data set but not a
    sampling seed; the summary also reports how often a pair disagreed.
    """
    cfg = cfg or BanditConfig()
    per_instance = 2 if paired else 1
    rows = {"instance": [], "run": [], "answer": [], "oracle": [], "correct": []}
    disagreements = 0
    for i in range(-(-trials // per_instance)):
        pts = analysis.gaussian_points(n, d, child_seed(seed, i))
        truth = int(np.argmax(exact_depths(pts, method=oracle)))
        answers = []
        for j in range(per_instance):
            if len(rows["run"]) == trials:
                break
            rep = adaptive_median(pts, replace(cfg, seed=child_seed(seed, i, j + 1)), workers)
            answers.append(rep.answer)
            rows["instance"].append(i)
            rows["run"].append(j)
            rows["answer"].append(rep.answer)
            rows["oracle"].append(truth)
            rows["correct"].append(rep.answer == truth)
        disagreements += len(set(answers)) > 1
    failures = trials - int(sum(rows["correct"]))
    summary = {
        "trials": trials,
        "failures": failures,
        "failure_fraction": failures / trials,
        "delta": cfg.delta,
        "pair_disagreements": disagreements if paired else None,
    }
    return summary, rows
