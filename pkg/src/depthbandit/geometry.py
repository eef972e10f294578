"""Barycentric coordinates and closed-simplex membership.

A simplex is stored as a partial-pivot LU factorization of its centered
vertex matrix ``X = [v_1 - v_0, ..., v_d - v_0]`` where ``v_0`` is the
lowest vertex index.  Barycentric coordinates are returned in the order
``(v_1, ..., v_d, v_0)``.

All substitution loops are written as explicit elementwise numpy
operations over the batch axes, so solving one query or a thousand gives
bit-identical coordinates.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

CONTAINMENT_TOL = 1e-9
PIVOT_TOL = 1e-12


class DegenerateSimplexError(ValueError):
    """Raised when barycentric coordinates are requested for a singular simplex."""


@dataclass(frozen=True)
class PointSet:
    """An ``n x d`` matrix of finite float64 points, one per row."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {arr.shape}")
        n, d = arr.shape
        if d < 1:
            raise ValueError("dimension must be at least 1")
        if n < d + 2:
            raise ValueError(f"need n >= d + 2 points, got n={n}, d={d}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("points contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SimplexFactorization:
    vertex_indices: tuple
    lu: np.ndarray  # (d, d) packed: unit-lower L below diagonal, U on and above
    perm: np.ndarray  # row permutation applied to the right-hand side
    base: np.ndarray  # coordinates of vertex_indices[0]
    inverse: np.ndarray  # X^{-1}, assembled from the LU factors
    offset: np.ndarray  # X^{-1} @ base
    singular: bool
    pivot_tolerance: float = PIVOT_TOL


@dataclass(frozen=True)
class SimplexBatch:
    """Many factorized simplices stacked along a leading batch axis."""

    vertex_indices: np.ndarray  # (B, d+1), each row sorted ascending
    lu: np.ndarray  # (B, d, d)
    perm: np.ndarray  # (B, d)
    base: np.ndarray  # (B, d)
    inverse: np.ndarray  # (B, d, d)
    offset: np.ndarray  # (B, d)
    singular: np.ndarray  # (B,) bool

    def __len__(self):
        return self.vertex_indices.shape[0]

    def __getitem__(self, b):
        return SimplexFactorization(
            vertex_indices=tuple(int(i) for i in self.vertex_indices[b]),
            lu=self.lu[b], perm=self.perm[b], base=self.base[b],
            inverse=self.inverse[b], offset=self.offset[b],
            singular=bool(self.singular[b]),
        )


def batched_lu(mats, pivot_tol=PIVOT_TOL):
    """Partial-pivot LU of a stack of square matrices.

    Returns ``(lu, perm, singular)`` where ``lu`` packs L (unit diagonal,
    strictly below) and U (on and above the diagonal), ``perm[b]`` is the
    row order such that ``mats[b][perm[b]] = L @ U``, and ``singular`` flags
    stacks whose smallest pivot magnitude is below ``pivot_tol`` times the
    largest.
    """
    a = np.array(mats, dtype=np.float64, copy=True)
    B, d, _ = a.shape
    perm = np.tile(np.arange(d), (B, 1))
    rows = np.arange(B)
    for k in range(d):
        p = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        swap = p != k
        if np.any(swap):
            r = rows[swap]
            pk = p[swap]
            tmp = a[r, k, :].copy()
            a[r, k, :] = a[r, pk, :]
            a[r, pk, :] = tmp
            tp = perm[r, k].copy()
            perm[r, k] = perm[r, pk]
            perm[r, pk] = tp
        piv = a[:, k, k]
        safe = np.where(piv == 0.0, 1.0, piv)
        for i in range(k + 1, d):
            m = np.where(piv == 0.0, 0.0, a[:, i, k] / safe)
            a[:, i, k] = m
            for j in range(k + 1, d):
                a[:, i, j] = a[:, i, j] - m * a[:, k, j]
    pivots = np.abs(np.diagonal(a, axis1=1, axis2=2))
    big = pivots.max(axis=1)
    singular = (pivots.min(axis=1) < pivot_tol * big) | (big == 0.0)
    return a, perm, singular


def lu_solve(lu, perm, rhs):
    """Solve ``X x = rhs`` from packed LU factors.

    ``lu`` is ``(..., d, d)``, ``perm`` is ``(..., d)`` and ``rhs`` is
    ``(..., q, d)`` with leading axes broadcast; returns ``(..., q, d)``.
    """
    d = lu.shape[-1]
    y = [None] * d
    for i in range(d):
        sel = perm[..., i][..., None, None]
        yi = np.take_along_axis(rhs, sel, axis=-1)[..., 0]
        for j in range(i):
            yi = yi - lu[..., i, j][..., None] * y[j]
        y[i] = yi
    x = [None] * d
    for i in range(d - 1, -1, -1):
        xi = y[i]
        for j in range(i + 1, d):
            xi = xi - lu[..., i, j][..., None] * x[j]
        x[i] = xi / lu[..., i, i][..., None]
    return np.stack(x, axis=-1)


def factorize_batch(points: PointSet, indices, pivot_tol=PIVOT_TOL) -> SimplexBatch:
    """Factorize every simplex in ``indices`` (shape ``(B, d+1)``)."""
    idx = np.sort(np.asarray(indices, dtype=np.int64).reshape(-1, points.d + 1), axis=1)
    if idx.size and (idx.min() < 0 or idx.max() >= points.n):
        raise IndexError("simplex vertex index out of range")
    if np.any(idx[:, 1:] == idx[:, :-1]):
        raise ValueError("simplex vertex indices must be distinct")
    d = points.d
    verts = points.data[idx]  # (B, d+1, d)
    base = verts[:, 0, :]
    # column j of X is v_{j+1} - v_0
    x = np.swapaxes(verts[:, 1:, :] - base[:, None, :], 1, 2)
    lu, perm, singular = batched_lu(x, pivot_tol)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        # rows of the solve against the identity are the columns of X^{-1}
        inverse = np.swapaxes(lu_solve(lu, perm, np.broadcast_to(np.eye(d), (len(idx), d, d))), 1, 2)
        offset = _matvec(inverse, base[:, None, :])[:, 0, :]
    return SimplexBatch(idx, lu, perm, base, inverse, offset, singular)


def factorize_simplex(points: PointSet, indices, pivot_tol=PIVOT_TOL) -> SimplexFactorization:
    idx = [int(i) for i in indices]
    if len(idx) != points.d + 1:
        raise ValueError(f"a simplex in d={points.d} needs {points.d + 1} vertices")
    if any(i < 0 or i >= points.n for i in idx):
        raise IndexError(f"vertex index out of range [0, {points.n})")
    if len(set(idx)) != len(idx):
        raise ValueError("simplex vertex indices must be distinct")
    fact = factorize_batch(points, [idx], pivot_tol)[0]
    if pivot_tol != PIVOT_TOL:
        fact = SimplexFactorization(**{**fact.__dict__, "pivot_tolerance": pivot_tol})
    return fact


def _matvec(a, q):
    """Rows ``sum_j a[..., i, j] * q[..., j]`` as a list of ``d`` arrays, fixed summation order."""
    d = a.shape[-1]
    out = []
    for i in range(d):
        acc = a[..., i, 0][..., None] * q[..., 0]
        for j in range(1, d):
            acc = acc + a[..., i, j][..., None] * q[..., j]
        out.append(acc)
    return np.stack(out, axis=-1)


def _inside(inverse, offset, queries, tol):
    """Closed-containment mask; same elementwise sequence for any batch shape."""
    d = inverse.shape[-1]
    total = None
    inside = None
    for i in range(d):
        acc = inverse[..., i, 0][..., None] * queries[..., 0]
        for j in range(1, d):
            acc = acc + inverse[..., i, j][..., None] * queries[..., j]
        lam = acc - offset[..., i][..., None]
        ok = lam >= -tol
        inside = ok if inside is None else inside & ok
        total = lam if total is None else total + lam
    return inside & (1.0 - total >= -tol)


def barycentric(fact: SimplexFactorization, points: PointSet, query) -> np.ndarray:
    """Coordinates ordered ``(v_1, ..., v_d, v_0)``; they sum to one."""
    if fact.singular:
        raise DegenerateSimplexError(f"simplex {fact.vertex_indices} is degenerate")
    q = np.asarray(query, dtype=np.float64).reshape(1, points.d)
    lam = _matvec(fact.inverse, q)[0] - fact.offset
    return np.append(lam, 1.0 - lam.sum())


def _contains_many(fact, points, queries, tol, counter):
    if fact.singular:
        if counter is not None:
            counter["degenerate"] = counter.get("degenerate", 0) + 1
        return np.zeros(len(queries), dtype=bool)
    with np.errstate(all="ignore"):
        inside = _inside(fact.inverse, fact.offset, queries, tol)
    # vertices are members exactly, whatever the conditioning
    verts = points.data[list(fact.vertex_indices)]
    return inside | (queries[:, None, :] == verts[None, :, :]).all(axis=2).any(axis=1)


def contains(fact: SimplexFactorization, points: PointSet, query, tol=CONTAINMENT_TOL,
             counter: Counter | None = None) -> bool:
    """Closed containment test; singular simplices contain nothing.

    When ``counter`` is given, degenerate simplices increment
    ``counter["degenerate"]``.
    """
    q = np.asarray(query, dtype=np.float64).reshape(1, points.d)
    return bool(_contains_many(fact, points, q, tol, counter)[0])


def batch_contains(fact: SimplexFactorization, points: PointSet, query_indices,
                   tol=CONTAINMENT_TOL, counter: Counter | None = None) -> np.ndarray:
    idx = np.asarray(query_indices, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        return np.zeros(0, dtype=bool)
    if idx.min() < 0 or idx.max() >= points.n:
        raise IndexError("query index out of range")
    return _contains_many(fact, points, points.data[idx], tol, counter)


def batch_contains_many(batch: SimplexBatch, queries: np.ndarray, tol=CONTAINMENT_TOL,
                        query_indices=None) -> np.ndarray:
    """Containment matrix of shape ``(B, q)`` for every simplex and query.

    Singular simplices yield all-False rows.  With ``query_indices`` a query
    that is a vertex of a simplex is marked inside without arithmetic, which
    matches :func:`contains` on point sets without duplicate points.
    """
    B = len(batch)
    q = np.asarray(queries, dtype=np.float64)
    if B == 0 or q.shape[0] == 0:
        return np.zeros((B, q.shape[0]), dtype=bool)
    with np.errstate(all="ignore"):
        inside = _inside(batch.inverse, batch.offset, q[None, :, :], tol)
    if query_indices is not None:
        mark_vertices(inside, batch.vertex_indices, query_indices)
    inside[batch.singular] = False
    return inside


def mark_vertices(inside, vertex_indices, query_indices):
    """Set ``inside[b, j]`` wherever query ``j`` is a vertex of simplex ``b``."""
    q = np.asarray(query_indices, dtype=np.int64)
    pos = np.full(int(max(vertex_indices.max(), q.max())) + 1, -1, dtype=np.int64)
    pos[q] = np.arange(q.size)
    p = pos[vertex_indices]
    rows = np.broadcast_to(np.arange(len(p))[:, None], p.shape)
    hit = p >= 0
    inside[rows[hit], p[hit]] = True
