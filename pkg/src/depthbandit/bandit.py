"""Successive-elimination algorithms for adaptive data depth.

Every task runs through :func:`meta_run`: rounds of doubling accuracy, in
which active points are estimated to ``eps_r / 2`` by an approximate depth
plug-in, a task strategy retires points it no longer needs to refine, and
the whole active set is handed to the exact plug-in once approximation
would cost more than exact computation.

Approximate plug-ins need ``cost(eps, delta)``, ``estimate(active, eps,
delta, round_index)``, a per-point ``samples`` array and ``unit_cost``.
Exact plug-ins are callables over an index array with an ``e_cost``
attribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .depth import ExactSimplicial, SimplexSampler
from .geometry import PointSet


@dataclass(frozen=True)
class RoundSchedule:
    r: int
    epsilon: float
    t: int


def next_round(prev: RoundSchedule | None, n, delta, c_t=1.0) -> RoundSchedule:
    """Advance to the next round: ``eps_r = 2^-r`` and cumulative sample
    target ``ceil(c_t * 2 eps_r^-2 ln(4 n r^2 / delta))``."""
    r = 1 if prev is None else prev.r + 1
    eps = 2.0 ** -r
    t = math.ceil(c_t * 2.0 / (eps * eps) * math.log(4.0 * n * r * r / delta))
    return RoundSchedule(r, eps, t)


# -- tasks ------------------------------------------------------------------

@dataclass(frozen=True)
class Median:
    name = "median"


@dataclass(frozen=True)
class TopK:
    k: int
    name = "topk"


@dataclass(frozen=True)
class CoarseRank:
    boundaries: tuple
    name = "coarse_rank"


@dataclass(frozen=True)
class BanditConfig:
    delta: float = 0.05
    epsilon: float = 0.0
    c_t: float = 1.0
    switch_factor: float = 1.0
    task: Median | TopK | CoarseRank = Median()
    seed: int = 0
    e_cost: float | None = None  # overrides the exact plug-in's cost

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.c_t <= 0:
            raise ValueError("c_t must be positive")
        if not 0.0 < self.switch_factor <= 1.0:
            raise ValueError("switch_factor must lie in (0, 1]")
        if self.e_cost is not None and self.e_cost <= 0:
            raise ValueError("e_cost must be positive")


@dataclass
class RoundRecord:
    r: int
    epsilon: float
    samples: int
    active: np.ndarray
    means: np.ndarray


@dataclass
class RunReport:
    task: str
    answer: object
    estimates: np.ndarray
    pulls: np.ndarray
    exact_computed: np.ndarray
    rounds: int
    total_cost_units: float
    e_cost: float
    last_round: np.ndarray
    history: list = field(default_factory=list, repr=False)

    @property
    def gap_estimates(self):
        return self.estimates.max() - self.estimates


# -- elimination strategies ---------------------------------------------------

def _rank_desc(idx, vals):
    """Positions sorting ``vals`` descending, ties by ascending index."""
    return np.lexsort((idx, -vals))


class _MedianStrategy:
    def __init__(self, n, epsilon):
        self.epsilon = epsilon
        self.answer = None

    def update(self, active, means, eps_r):
        m = means[active]
        return m < m.max() - eps_r

    def done(self, active, eps_r):
        return len(active) == 1 or (self.epsilon > 0 and eps_r <= self.epsilon / 2)

    def finish(self, active, means):
        self.answer = int(active[np.argmax(means[active])])


class _TopKStrategy:
    def __init__(self, n, epsilon, k):
        if not 1 <= k < n:
            raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
        self.k = k
        self.epsilon = epsilon
        self.accepted = []
        self.answer = None
        self._round_set = None

    def update(self, active, means, eps_r):
        self._round_set = active
        m = means[active]
        need = self.k - len(self.accepted)
        order = _rank_desc(active, m)
        thresh = m[order[min(need, len(m)) - 1]]
        self.accepted.extend(int(i) for i in active[m >= thresh + eps_r])
        return np.abs(m - thresh) >= eps_r

    def done(self, active, eps_r):
        return len(self.accepted) >= self.k or eps_r <= self.epsilon / 2

    def finish(self, active, means):
        taken = np.asarray(self.accepted, dtype=np.int64)
        pool = np.setdiff1d(active, taken)
        need = self.k - len(self.accepted)
        if need > len(pool) and self._round_set is not None:
            pool = np.setdiff1d(np.union1d(pool, self._round_set), taken)
        if need > 0:
            order = _rank_desc(pool, means[pool])
            self.accepted.extend(int(i) for i in pool[order[:need]])
        self.answer = sorted(self.accepted[: self.k])


class _CoarseRankStrategy:
    """Retire an arm once it is at least ``eps_r`` from every open boundary statistic.

    Boundary ``j`` separates the deepest ``m_j`` points from the rest.  With
    ``a_j`` points already retired above it, its statistic is the
    ``(m_j - a_j)``-th largest active estimate; when that rank falls outside
    the active set the boundary is settled for every active arm.
    """

    def __init__(self, n, epsilon, boundaries):
        b = [int(v) for v in boundaries]
        if len(b) < 2 or b[0] != 0 or b[-1] != n or any(y <= x for x, y in zip(b, b[1:])):
            raise ValueError(f"boundaries must be strictly increasing from 0 to n={n}, got {b}")
        self.b = b
        self.epsilon = epsilon
        self.cluster = np.full(n, -1, dtype=np.int64)
        self.answer = None

    def update(self, active, means, eps_r):
        m = means[active]
        order = _rank_desc(active, m)
        sorted_m = m[order]
        below = np.zeros(len(active), dtype=np.int64)
        undecided = np.zeros(len(active), dtype=bool)
        for j in range(1, len(self.b) - 1):
            above_retired = int(np.sum((self.cluster >= 0) & (self.cluster < j)))
            rank = self.b[j] - above_retired
            if rank <= 0:
                below += 1
            elif rank >= len(active):
                continue
            else:
                thr = sorted_m[rank - 1]
                below += m <= thr - eps_r
                undecided |= np.abs(m - thr) < eps_r
        retire = ~undecided
        self.cluster[active[retire]] = below[retire]
        return retire

    def done(self, active, eps_r):
        return len(active) == 0 or (self.epsilon > 0 and eps_r <= self.epsilon / 2)

    def finish(self, active, means):
        if len(active):
            order = active[_rank_desc(active, means[active])]
            slots = []
            for c in range(len(self.b) - 1):
                free = self.b[c + 1] - self.b[c] - int(np.sum(self.cluster == c))
                slots.extend([c] * max(free, 0))
            slots.extend([len(self.b) - 2] * max(0, len(order) - len(slots)))
            self.cluster[order] = slots[: len(order)]
        self.answer = [int(c) for c in self.cluster]


def _strategy(task, n, epsilon):
    if isinstance(task, Median):
        return _MedianStrategy(n, epsilon)
    if isinstance(task, TopK):
        return _TopKStrategy(n, epsilon, task.k)
    if isinstance(task, CoarseRank):
        return _CoarseRankStrategy(n, epsilon, task.boundaries)
    raise ValueError(f"unknown task {task!r}")


# -- driver -----------------------------------------------------------------

def meta_run(points: PointSet, cfg: BanditConfig, a_depth=None, e_depth=None, workers=1) -> RunReport:
    """Adaptive depth computation for ``cfg.task``.

    Each round ``r`` asks ``a_depth`` for estimates of accuracy ``eps_r / 2``
    at failure level ``delta / (2 n r^2)``.  When that would cost more than
    ``switch_factor * e_cost`` the active points are computed exactly and
    the task is resolved from the exact values.
    """
    n = points.n
    if a_depth is None:
        a_depth = SimplexSampler(points, cfg.seed, cfg.c_t, workers)
    if e_depth is None:
        e_depth = ExactSimplicial(points)
    e_cost = float(cfg.e_cost if cfg.e_cost is not None else e_depth.e_cost)
    strategy = _strategy(cfg.task, n, cfg.epsilon)

    active = np.arange(n)
    means = np.zeros(n)
    exact = np.zeros(n, dtype=bool)
    last_round = np.zeros(n, dtype=np.int64)
    history = []
    sched = None
    while True:
        sched = next_round(sched, n, cfg.delta, cfg.c_t)
        r, eps_r = sched.r, sched.epsilon
        delta_r = cfg.delta / (2.0 * n * r * r)
        if a_depth.cost(eps_r / 2, delta_r) > cfg.switch_factor * e_cost:
            means[active] = e_depth(active)
            exact[active] = True
            last_round[active] = r
            strategy.finish(active, means)
            break
        means[active] = a_depth.estimate(active, eps_r / 2, delta_r, r)
        last_round[active] = r
        history.append(RoundRecord(r, eps_r, int(a_depth.samples[active].max()),
                                   active.copy(), means[active].copy()))
        retire = strategy.update(active, means, eps_r)
        active = active[~retire]
        if strategy.done(active, eps_r):
            strategy.finish(active, means)
            break

    pulls = np.asarray(a_depth.samples, dtype=np.int64).copy()
    total = float(pulls.sum()) * a_depth.unit_cost + float(exact.sum()) * e_cost
    return RunReport(
        task=cfg.task.name,
        answer=strategy.answer,
        estimates=means,
        pulls=pulls,
        exact_computed=exact,
        rounds=sched.r,
        total_cost_units=total,
        e_cost=e_cost,
        last_round=last_round,
        history=history,
    )


def _require(cfg, kind):
    if not isinstance(cfg.task, kind):
        raise ValueError(f"expected a {kind.__name__} task, got {cfg.task!r}")


def adaptive_median(points: PointSet, cfg: BanditConfig, workers=1) -> RunReport:
    _require(cfg, Median)
    return meta_run(points, cfg, workers=workers)


def adaptive_topk(points: PointSet, cfg: BanditConfig, workers=1) -> RunReport:
    _require(cfg, TopK)
    return meta_run(points, cfg, workers=workers)


def coarse_rank(points: PointSet, cfg: BanditConfig, workers=1) -> RunReport:
    _require(cfg, CoarseRank)
    return meta_run(points, cfg, workers=workers)
