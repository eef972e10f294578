"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL (...)`` line.  Run with
``pytest tests/test_acceptance.py -v`` or directly with ``python``.
"""

import json
import math
import sys
import time

import numpy as np
import pytest
from conftest import gaussian

from depthbandit.analysis import (
    exhaustive_cost,
    fit_power_law,
    gap_profile,
    loglog_slope,
    pool_profiles,
    pulls_vs_gap,
    scaling_curve,
)
from depthbandit.bandit import BanditConfig, CoarseRank, TopK, adaptive_median, coarse_rank, meta_run, adaptive_topk
from depthbandit.cli import main
from depthbandit.depth import ExactSimplicial, exact_depths, mc_estimate, naive_counts, planar_counts, round_rng

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok
    return emit


def test_criterion_01_planar_equals_naive(report):
    start = time.perf_counter()
    bad = 0
    for s in range(50):
        n = 10 + s  # 10..59
        ps = gaussian(n, 2, 100 + s)
        naive, total = naive_counts(ps)
        planar, total_p = planar_counts(ps)
        bad += not (np.array_equal(naive, planar) and total == total_p)
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 60
    assert report(1, ok, f"{50 - bad}/50 instances identical, {elapsed:.1f}s")


def test_criterion_02_mc_unbiased(report):
    ps = gaussian(30, 2, 2024)
    mu = naive_counts(ps, [0])[0][0] / math.comb(30, 3)
    S = 50000
    band = 3 * math.sqrt(mu * (1 - mu) / S)
    within = sum(abs(mc_estimate(ps, [0], S, round_rng(seed, 1))[0] / S - mu) <= band for seed in range(100))
    assert report(2, within >= 99, f"{within}/100 seeds within 3 sigma of depth {mu:.4f}")


def test_criterion_03_median_correctness(report):
    correct = 0
    for t in range(200):
        ps = gaussian(100, 2, 30_000 + t)
        hits, _ = naive_counts(ps)
        truth = int(np.argmax(hits))
        correct += adaptive_median(ps, BanditConfig(delta=0.05, seed=t)).answer == truth
    assert report(3, correct >= 183, f"{correct}/200 agree with enumeration, need 183")


def test_criterion_04_pulls_linear_in_inverse_gap(report):
    ps = gaussian(2000, 2, 4)
    d = exact_depths(ps, method="planar")
    gaps = d.max() - d
    runs = [adaptive_median(ps, BanditConfig(c_t=0.1, seed=s)) for s in range(50)]
    reg = pulls_vs_gap(runs, gaps)
    ok = reg.r_squared >= 0.9
    assert report(4, ok, f"R^2 = {reg.r_squared:.4f} over {reg.n_used} arms, {reg.n_excluded} exact")


def test_criterion_05_power_law(report):
    profiles = [gap_profile(exact_depths(gaussian(200, 2, 500 + i))) for i in range(10)]
    fit = fit_power_law(pool_profiles(profiles))
    ok = 0.9 <= fit.alpha <= 1.4
    assert report(5, ok, f"alpha = {fit.alpha:.3f}, R^2 = {fit.r_squared:.3f}")


def test_criterion_06_median_depth_level(report):
    top = exact_depths(gaussian(2000, 2, 6), method="planar").max()
    ok = 0.22 <= top <= 0.27 and top >= 1 / 27
    assert report(6, ok, f"max depth = {top:.4f}")


def test_criterion_07_scaling(report):
    ns = [500, 1000, 2000, 4000]
    curve = scaling_curve(lambda n, t: gaussian(n, 2, 70_000 + 10 * n + t), ns, BanditConfig(c_t=0.1), trials=3)
    planar = loglog_slope(ns, [exhaustive_cost(n, 2, "planar") for n in ns])
    ok = 1.3 <= curve.slope <= 1.8 and 1.9 <= planar <= 2.2
    assert report(7, ok, f"adaptive slope = {curve.slope:.3f}, planar baseline slope = {planar:.3f}")


def _distinct_instances(count, start):
    """Instances with n in 60..80 whose depths are distinct apart from the tied hull minimum."""
    seed = start
    while count:
        n = 60 + seed % 21
        ps = gaussian(n, 2, seed)
        d = exact_depths(ps, method="planar")  # screen only
        inner = d[d > d.min()]
        if len(np.unique(inner)) == len(inner):
            hits, total = naive_counts(ps)
            yield ps, hits / total
            count -= 1
        seed += 1


def test_criterion_08_topk_and_coarse_rank(report):
    limit = 0.05 + 3 * math.sqrt(0.05 * 0.95 / 100)
    topk_err = rank_err = 0
    for t, (ps, d) in enumerate(_distinct_instances(100, 80_000)):
        order = np.argsort(-d, kind="stable")
        truth = set(order[:5].tolist())
        got = adaptive_topk(ps, BanditConfig(task=TopK(5), seed=t))
        topk_err += set(got.answer) != truth
        rep = coarse_rank(ps, BanditConfig(task=CoarseRank((0, 5, ps.n)), seed=t))
        rank_err += {i for i, c in enumerate(rep.answer) if c == 0} != truth
    ok = topk_err / 100 <= limit and rank_err / 100 <= limit
    assert report(8, ok, f"top-k errors {topk_err}/100, coarse-rank errors {rank_err}/100, "
                         f"limit {limit:.3f}")


def test_criterion_09_elimination_deadline(report):
    good = violations = 0
    for t in range(30):
        ps = gaussian(100, 2, 90_000 + t)
        e_depth = ExactSimplicial(ps, method="naive")
        mu = e_depth(np.arange(100))
        rep = meta_run(ps, BanditConfig(seed=t), e_depth=e_depth)
        if not all(np.all(np.abs(h.means - mu[h.active]) < h.epsilon / 2) for h in rep.history):
            continue
        good += 1
        gaps = mu.max() - mu
        for i in np.flatnonzero(gaps > 0):
            deadline = math.ceil(math.log2(2 / gaps[i]))
            violations += rep.last_round[i] > deadline and not rep.exact_computed[i]
    ok = violations == 0 and good >= 10
    assert report(9, ok, f"{good}/30 runs on the good event, {violations} deadline violations")


def _strip(path):
    doc = json.loads(path.read_text())
    doc.pop("wall_time_ms")
    return json.dumps(doc, sort_keys=True)


def test_criterion_10_cli_determinism(report, tmp_path, monkeypatch, capsys):
    data = tmp_path / "data.csv"
    main(["generate", "--n", "1500", "--d", "2", "--seed", "10", "--out", str(data)])
    small = tmp_path / "small.csv"
    main(["generate", "--n", "40", "--d", "2", "--seed", "11", "--out", str(small)])
    commands = {
        "depth-naive": ["depth", str(small), "--all", "--method", "naive"],
        "depth-planar": ["depth", str(data), "--all", "--method", "planar"],
        "depth-mc": ["depth", str(data), "--all", "--method", "mc", "--samples", "3000", "--seed", "5"],
        "median": ["median", str(data), "--ct", "0.1", "--seed", "3"],
        "topk": ["topk", str(data), "--k", "10", "--ct", "0.1", "--seed", "3"],
        "rank": ["rank", str(data), "--boundaries", "0,5,50,n", "--ct", "0.1", "--seed", "3"],
    }
    differ = []
    for name, args in commands.items():
        outs = []
        for threads in ("1", "8"):
            monkeypatch.setenv("DEPTHBANDIT_THREADS", threads)
            out = tmp_path / f"{name}-{threads}.json"
            assert main(args + ["--out", str(out)]) == 0
            outs.append(_strip(out))
        if outs[0] != outs[1]:
            differ.append(name)
    capsys.readouterr()
    ok = not differ
    assert report(10, ok, f"{len(commands) - len(differ)}/{len(commands)} commands byte-identical"
                          + (f", differing: {differ}" if differ else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
