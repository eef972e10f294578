import itertools

import numpy as np
import pytest

from depthbandit.geometry import PointSet


def gaussian(n, d, seed):
    return PointSet(np.random.default_rng(seed).standard_normal((n, d)))


def dense_depth(data, i):
    """Reference depth by looping over subsets with a plain dense solve."""
    data = np.asarray(data, dtype=float)
    n, d = data.shape
    hits = 0
    total = 0
    for sub in itertools.combinations(range(n), d + 1):
        total += 1
        v = data[list(sub)]
        A = np.vstack([v.T, np.ones(d + 1)])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        lam = np.linalg.solve(A, np.append(data[i], 1.0))
        hits += bool(np.all(lam >= -1e-9))
    return hits, total


@pytest.fixture
def four_points():
    return PointSet(np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]))
