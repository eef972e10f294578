"""Adaptive simplicial depth via successive elimination."""

from .bandit import (
    BanditConfig,
    CoarseRank,
    Median,
    RunReport,
    TopK,
    adaptive_median,
    adaptive_topk,
    coarse_rank,
    meta_run,
    next_round,
)
from .depth import (
    DepthEstimate,
    ExactMajority,
    ExactSimplicial,
    InstanceTooLargeError,
    MajoritySampler,
    SimplexSampler,
    exact_depth_naive,
    exact_depth_planar,
    exact_depths,
    mc_estimate,
)
from .geometry import DegenerateSimplexError, PointSet, barycentric, contains, factorize_simplex

__version__ = "0.1.0"
