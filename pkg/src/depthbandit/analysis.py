"""Gap distributions, power-law fits, pull regressions and cost scaling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bandit import BanditConfig, RunReport, adaptive_median
from .geometry import PointSet


@dataclass(frozen=True)
class GapProfile:
    gaps: np.ndarray  # ascending
    normalized_gaps: np.ndarray  # gaps / max gap, in [0, 1]
    source: str  # "exact" or "approximate"


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    r_squared: float
    n_points_used: int
    intercept: float = 0.0


@dataclass(frozen=True)
class Regression:
    slope: float
    intercept: float
    r_squared: float
    n_used: int
    n_excluded: int


@dataclass(frozen=True)
class ScalingCurve:
    ns: tuple
    costs: tuple
    slope: float


def gaussian_points(n, d, seed) -> PointSet:
    """``n`` i.i.d. standard normal points in ``d`` dimensions."""
    return PointSet(np.random.default_rng(seed).standard_normal((n, d)))


def gap_profile(source, exact=None) -> GapProfile:
    """Depth gaps to the deepest point, from a :class:`RunReport` or a depth vector.

    A report's profile is marked exact only when every point was computed
    exactly; a plain vector is taken as exact unless ``exact=False``.
    """
    if isinstance(source, RunReport):
        depths = source.estimates
        flag = bool(np.all(source.exact_computed)) if exact is None else exact
    else:
        depths = np.asarray(source, dtype=np.float64)
        flag = True if exact is None else exact
    if depths.size < 2:
        raise ValueError("a gap profile needs at least 2 points")
    gaps = np.sort(depths.max() - depths)
    top = gaps[-1]
    if top <= 0:
        raise ValueError("degenerate profile: all depths are equal")
    return GapProfile(gaps, gaps / top, "exact" if flag else "approximate")


def pool_profiles(profiles) -> GapProfile:
    """Concatenate normalized gaps from several instances."""
    profiles = list(profiles)
    gaps = np.sort(np.concatenate([p.gaps for p in profiles]))
    norm = np.sort(np.concatenate([p.normalized_gaps for p in profiles]))
    source = "exact" if all(p.source == "exact" for p in profiles) else "approximate"
    return GapProfile(gaps, norm, source)


def empirical_cdf(profile: GapProfile):
    """``(gap, F(gap))`` at each distinct normalized gap, ``F`` counting ties."""
    g = profile.normalized_gaps
    values = np.unique(g)
    return values, np.searchsorted(g, values, side="right") / g.size


def _ols(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("regressor has zero variance")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    yc = y - y.mean()
    syy = float(yc @ yc)
    r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 1.0
    return slope, intercept, min(max(r2, 0.0), 1.0)


def fit_power_law(profile: GapProfile, min_points=10) -> PowerLawFit:
    """Fit ``F(g) = g^alpha`` to the empirical CDF by log-log least squares.

    Zero gaps are dropped from the regression but still count in the CDF.
    """
    g, F = empirical_cdf(profile)
    keep = g > 0
    if keep.sum() < min_points:
        raise ValueError(f"need at least {min_points} nonzero gaps, got {int(keep.sum())}")
    slope, intercept, r2 = _ols(np.log(g[keep]), np.log(F[keep]))
    return PowerLawFit(slope, r2, int(keep.sum()), intercept)


def pulls_vs_gap(reports, exact_gaps, min_arms=10) -> Regression:
    """OLS of pull counts on inverse squared gap over arms never computed exactly.

    ``reports`` is one report or several runs on the same instance; with
    several, pulls are averaged and an arm is excluded if any run computed
    it exactly.
    """
    if isinstance(reports, RunReport):
        reports = [reports]
    pulls = np.mean([r.pulls for r in reports], axis=0)
    exact = np.any([r.exact_computed for r in reports], axis=0)
    gaps = np.asarray(exact_gaps, dtype=np.float64)
    use = ~exact & (gaps > 0)
    if use.sum() < min_arms:
        raise ValueError(f"only {int(use.sum())} qualifying arms, need {min_arms}")
    slope, intercept, r2 = _ols(gaps[use] ** -2.0, pulls[use])
    return Regression(slope, intercept, r2, int(use.sum()), int(exact.sum()))


def loglog_slope(ns, costs):
    slope, _, _ = _ols(np.log(ns), np.log(costs))
    return slope


def exhaustive_cost(n, d=2, method="planar"):
    """Units to compute every point's depth exactly with no adaptivity."""
    if method == "planar":
        return n * n * math.log(n)
    if method == "naive":
        return n * math.comb(n, d + 1)
    raise ValueError(f"unknown method {method!r}")


def scaling_curve(generator, n_list, cfg: BanditConfig, trials=1, workers=1) -> ScalingCurve:
    """Mean adaptive-median cost per ``n`` and its log-log slope.

    ``generator(n, trial)`` returns a :class:`PointSet`; trial ``t`` runs
    with seed ``cfg.seed + t``.
    """
    ns = sorted(int(n) for n in n_list)
    if len(ns) < 3:
        raise ValueError("scaling needs at least 3 values of n")
    costs = []
    for n in ns:
        runs = []
        for t in range(trials):
            run_cfg = replace(cfg, seed=cfg.seed + t)
            runs.append(adaptive_median(generator(n, t), run_cfg, workers).total_cost_units)
        costs.append(float(np.mean(runs)))
    return ScalingCurve(tuple(ns), tuple(costs), loglog_slope(ns, costs))
