"""Exact and sampled simplicial depth, plus a majority-depth sampler.

Depth counts closed simplices, so every simplex that has the query as a
vertex contains it.  Degenerate simplices (and rank-deficient hyperplanes
for majority depth) never contain anything; the exact enumerators apply the
same rule as the samplers so the two paths agree in expectation.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import CONTAINMENT_TOL, PIVOT_TOL, PointSet, batch_contains_many, factorize_batch

NAIVE_CAP = 10**9
# (simplex, query) pairs evaluated per block; bounds temporary memory.
_BLOCK_PAIRS = 1 << 20


class InstanceTooLargeError(ValueError):
    """The naive enumerator refuses instances above its combinatorial cap."""


@dataclass(frozen=True)
class DepthEstimate:
    point_index: int
    mean: float
    samples: int
    exact: bool
    hits: int = 0


@dataclass(frozen=True)
class CostModel:
    e_cost: float
    a_cost: Callable[[float, float], float]


def hoeffding_samples(eps, delta, scale=1.0):
    """Samples for a two-sided Hoeffding interval of half-width ``eps`` at level ``delta``."""
    return math.ceil(scale * math.log(2.0 / delta) / (2.0 * eps * eps))


def round_rng(seed, r):
    """Independent generator for round ``r``; depends only on ``(seed, r)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(r),)))


def planar_e_cost(n):
    return n * math.log(n)


def default_cost_model(points: PointSet, c_t=1.0) -> CostModel:
    if points.d == 2:
        e_cost = planar_e_cost(points.n)
    else:
        e_cost = float(math.comb(points.n, points.d + 1))
    return CostModel(e_cost, lambda eps, delta: hoeffding_samples(eps, delta, c_t))


# -- subset sampling ---------------------------------------------------------

def sample_subsets(rng, n, k, size):
    """``size`` independent uniform ``k``-subsets of ``range(n)``, rows sorted.

    Floyd's algorithm, vectorised across rows.
    """
    out = np.empty((size, k), dtype=np.int64)
    for col, j in enumerate(range(n - k, n)):
        t = rng.integers(0, j + 1, size=size)
        if col:
            dup = np.any(out[:, :col] == t[:, None], axis=1)
            t = np.where(dup, j, t)
        out[:, col] = t
    out.sort(axis=1)
    return out


def _iter_combinations(n, k, chunk):
    it = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64)
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def _as_indices(indices, n):
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"point index out of range [0, {n})")
    return idx


# -- exact simplicial depth ---------------------------------------------------

def naive_counts(points: PointSet, indices=None, cap=NAIVE_CAP, tol=CONTAINMENT_TOL):
    """Containing-simplex counts by full enumeration of all ``C(n, d+1)`` simplices."""
    idx = _as_indices(indices, points.n)
    total = math.comb(points.n, points.d + 1)
    if total > cap:
        raise InstanceTooLargeError(
            f"instance too large for naive oracle: C({points.n},{points.d + 1}) = {total} > {cap}")
    hits = np.zeros(idx.size, dtype=np.int64)
    if idx.size == 0:
        return hits, total
    queries = points.data[idx]
    chunk = max(1, _BLOCK_PAIRS // idx.size)
    for simplices in _iter_combinations(points.n, points.d + 1, chunk):
        batch = factorize_batch(points, simplices)
        hits += batch_contains_many(batch, queries, tol, idx).sum(axis=0)
    return hits, total


def exact_depth_naive(points: PointSet, i, cap=NAIVE_CAP) -> DepthEstimate:
    hits, total = naive_counts(points, [i], cap)
    return DepthEstimate(int(i), int(hits[0]) / total, total, True, int(hits[0]))


def planar_counts(points: PointSet, indices=None):
    """Containing-triangle counts in the plane in O(n log n) per point.

    The other points are sorted by angle around the query (ties broken by
    index).  A triangle of three other points misses the query exactly when
    all three lie in an open half-plane through it; each such triple is
    counted once from its first point in angular order.  Triangles that use
    the query as a vertex always contain it.
    """
    if points.d != 2:
        raise ValueError(f"planar exact depth needs d = 2, got d = {points.d}")
    idx = _as_indices(indices, points.n)
    n = points.n
    m = n - 1
    total = math.comb(n, 3)
    base = math.comb(m, 3) + math.comb(m, 2)
    hits = np.zeros(idx.size, dtype=np.int64)
    x, y = points.data[:, 0], points.data[:, 1]
    pos = np.arange(m)
    rows = max(1, _BLOCK_PAIRS // n)
    for start in range(0, idx.size, rows):
        q = idx[start:start + rows]
        ang = np.arctan2(y[None, :] - y[q, None], x[None, :] - x[q, None])
        ang[np.arange(q.size), q] = np.inf
        ang = np.sort(ang, axis=1, kind="stable")[:, :m]
        for r in range(q.size):
            ts = ang[r]
            doubled = np.concatenate([ts, ts + 2 * np.pi])
            k = np.searchsorted(doubled, ts + np.pi, side="left") - pos - 1
            hits[start + r] = base - int(np.sum(k * (k - 1) // 2))
    return hits, total


def exact_depth_planar(points: PointSet, i) -> DepthEstimate:
    hits, total = planar_counts(points, [i])
    return DepthEstimate(int(i), int(hits[0]) / total, total, True, int(hits[0]))


def exact_depths(points: PointSet, indices=None, method="auto", cap=NAIVE_CAP):
    """Exact simplicial depths as floats; ``method`` is ``auto``, ``planar`` or ``naive``."""
    if method == "auto":
        method = "planar" if points.d == 2 else "naive"
    if method == "planar":
        hits, total = planar_counts(points, indices)
    elif method == "naive":
        hits, total = naive_counts(points, indices, cap)
    else:
        raise ValueError(f"unknown exact method {method!r}")
    return hits / total


# -- Monte Carlo simplicial depth --------------------------------------------

def _run_blocks(fn, blocks, workers):
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, blocks))
    else:
        parts = [fn(b) for b in blocks]
    # merged in draw order
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def _blocks(num, width):
    step = max(1, _BLOCK_PAIRS // max(width, 1))
    return [(s, min(num, s + step)) for s in range(0, num, step)]


def mc_estimate(points: PointSet, active, num_new, rng, tol=CONTAINMENT_TOL,
                workers=1, counter: Counter | None = None):
    """Containment successes for each active point over ``num_new`` fresh simplices.

    Each simplex is a uniform ``(d+1)``-subset, factorized once and shared by
    every active point.
    """
    if num_new < 0:
        raise ValueError("num_new must be non-negative")
    act = _as_indices(active, points.n) if len(active) else np.zeros(0, dtype=np.int64)
    simplices = sample_subsets(rng, points.n, points.d + 1, int(num_new))
    if act.size == 0 or num_new == 0:
        return np.zeros(act.size, dtype=np.int64)
    queries = points.data[act]

    def run(block):
        lo, hi = block
        batch = factorize_batch(points, simplices[lo:hi])
        counts = batch_contains_many(batch, queries, tol, act).sum(axis=0, dtype=np.int64)
        return np.append(counts, np.int64(batch.singular.sum()))

    res = _run_blocks(run, _blocks(int(num_new), act.size), workers)
    if counter is not None:
        counter["degenerate"] += int(res[-1])
    return res[:-1]


# -- majority depth ---------------------------------------------------------

def hyperplane_normals(points: PointSet, subsets, pivot_tol=PIVOT_TOL):
    """Normals of the hyperplanes through each ``d``-subset and a degeneracy flag.

    The normal is the generalised cross product of the ``d - 1`` edge vectors.
    """
    verts = points.data[np.asarray(subsets, dtype=np.int64)]  # (B, d, d)
    B, d = verts.shape[0], points.d
    if d == 1:
        return np.ones((B, 1)), verts[:, 0, :], np.zeros(B, dtype=bool)
    edges = verts[:, 1:, :] - verts[:, :1, :]  # (B, d-1, d)
    normal = np.empty((B, d))
    for k in range(d):
        minor = np.delete(edges, k, axis=2)
        normal[:, k] = (-1) ** k * np.linalg.det(minor)
    scale = np.prod(np.linalg.norm(edges, axis=2), axis=1)
    degenerate = np.linalg.norm(normal, axis=1) <= pivot_tol * scale
    return normal, verts[:, 0, :], degenerate


def _signed_side(normal, anchor, pts):
    diff = pts[None, :, :] - anchor[:, None, :]
    s = normal[:, 0, None] * diff[..., 0]
    for k in range(1, normal.shape[1]):
        s = s + normal[:, k, None] * diff[..., k]
    return s


def _majority_hits(points: PointSet, subsets, queries_idx):
    """``(B, q)`` indicator of each query lying in a major closed side."""
    n = points.n
    normal, anchor, degenerate = hyperplane_normals(points, subsets)
    s_all = _signed_side(normal, anchor, points.data)  # (B, n)
    rows = np.arange(len(subsets))[:, None]
    s_all[rows, subsets] = 0.0
    half = (n + 1) // 2
    pos_major = (s_all >= 0).sum(axis=1) >= half
    neg_major = (s_all <= 0).sum(axis=1) >= half
    s = s_all[:, queries_idx]
    inside = ((s >= 0) & pos_major[:, None]) | ((s <= 0) & neg_major[:, None])
    inside[degenerate] = False
    return inside


def majority_counts(points: PointSet, indices=None, cap=NAIVE_CAP):
    """Exact majority-depth counts over all ``C(n, d)`` hyperplanes."""
    idx = _as_indices(indices, points.n)
    total = math.comb(points.n, points.d)
    if total > cap:
        raise InstanceTooLargeError(f"C({points.n},{points.d}) = {total} exceeds cap {cap}")
    hits = np.zeros(idx.size, dtype=np.int64)
    chunk = max(1, _BLOCK_PAIRS // points.n)
    for subsets in _iter_combinations(points.n, points.d, chunk):
        hits += _majority_hits(points, subsets, idx).sum(axis=0)
    return hits, total


def majority_sample(points: PointSet, active, num_new, rng, workers=1):
    if num_new < 0:
        raise ValueError("num_new must be non-negative")
    act = _as_indices(active, points.n) if len(active) else np.zeros(0, dtype=np.int64)
    subsets = sample_subsets(rng, points.n, points.d, int(num_new))
    if act.size == 0 or num_new == 0:
        return np.zeros(act.size, dtype=np.int64)

    def run(block):
        lo, hi = block
        return _majority_hits(points, subsets[lo:hi], act).sum(axis=0, dtype=np.int64)

    return _run_blocks(run, _blocks(int(num_new), points.n), workers)


# -- plug-ins for the adaptive algorithms -------------------------------------

class _CumulativeSampler:
    """Shared-sample estimator: every active arm sees the same draws, and
    each round only draws the increment up to its cumulative target."""

    unit_cost = 1.0

    def __init__(self, points: PointSet, seed=0, c_t=1.0, workers=1):
        if c_t <= 0:
            raise ValueError("c_t must be positive")
        self.points = points
        self.seed = seed
        self.c_t = c_t
        self.workers = workers
        self.hits = np.zeros(points.n, dtype=np.int64)
        self.samples = np.zeros(points.n, dtype=np.int64)
        self.drawn = 0

    def cost(self, eps, delta):
        return hoeffding_samples(eps, delta, self.c_t)

    def _draw(self, active, num_new, rng):
        raise NotImplementedError

    def estimate(self, active, eps, delta, round_index):
        active = np.asarray(active, dtype=np.int64)
        target = self.cost(eps, delta)
        new = max(0, target - self.drawn)
        counts = self._draw(active, new, round_rng(self.seed, round_index))
        self.hits[active] += counts
        self.samples[active] += new
        self.drawn = max(self.drawn, target)
        return self.hits[active] / np.maximum(self.samples[active], 1)


class SimplexSampler(_CumulativeSampler):
    def __init__(self, points, seed=0, c_t=1.0, workers=1, tol=CONTAINMENT_TOL):
        super().__init__(points, seed, c_t, workers)
        self.tol = tol
        self.degenerate = Counter()

    def _draw(self, active, num_new, rng):
        return mc_estimate(self.points, active, num_new, rng, self.tol, self.workers, self.degenerate)


class MajoritySampler(_CumulativeSampler):
    def _draw(self, active, num_new, rng):
        return majority_sample(self.points, active, num_new, rng, self.workers)


class ExactSimplicial:
    """Exact simplicial depth; planar method in d = 2, enumeration otherwise."""

    def __init__(self, points: PointSet, method="auto", cap=NAIVE_CAP):
        if method == "auto":
            method = "planar" if points.d == 2 else "naive"
        if method == "planar" and points.d != 2:
            raise ValueError("planar method requires d = 2")
        self.points = points
        self.method = method
        self.cap = cap
        if method == "planar":
            self.e_cost = planar_e_cost(points.n)
        else:
            self.e_cost = float(math.comb(points.n, points.d + 1))

    def __call__(self, indices):
        return exact_depths(self.points, indices, self.method, self.cap)


class ExactMajority:
    def __init__(self, points: PointSet, cap=NAIVE_CAP):
        self.points = points
        self.cap = cap
        self.e_cost = float(math.comb(points.n, points.d))

    def __call__(self, indices):
        hits, total = majority_counts(self.points, indices, self.cap)
        return hits / total
