import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from depthbandit.geometry import (
    DegenerateSimplexError,
    PointSet,
    barycentric,
    batch_contains,
    batch_contains_many,
    contains,
    factorize_batch,
    factorize_simplex,
)

TRI = PointSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3]]))
BIG = PointSet(np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]))


def test_pointset_validation():
    with pytest.raises(ValueError):
        PointSet(np.zeros((3, 2)))  # n < d + 2
    with pytest.raises(ValueError):
        PointSet(np.array([[0.0, 0.0], [1.0, np.nan], [2.0, 1.0], [3.0, 3.0]]))
    ps = PointSet(np.array([1.0, 2.0, 3.0]))
    assert (ps.n, ps.d) == (3, 1)
    with pytest.raises(ValueError):
        ps.data[0, 0] = 5.0


def test_identity_factorization():
    f = factorize_simplex(TRI, [0, 1, 2])
    assert not f.singular
    np.testing.assert_allclose(f.inverse, np.eye(2))


def test_collinear_is_singular():
    ps = PointSet(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [5.0, 0.0]]))
    f = factorize_simplex(ps, [0, 1, 2])
    assert f.singular
    with pytest.raises(DegenerateSimplexError):
        barycentric(f, ps, [0.5, 0.5])
    assert not contains(f, ps, [1.0, 1.0])


def test_index_errors():
    with pytest.raises(IndexError):
        factorize_simplex(TRI, [0, 1, 7])
    with pytest.raises(ValueError):
        factorize_simplex(TRI, [0, 1, 1])
    with pytest.raises(ValueError):
        factorize_simplex(TRI, [0, 1])


def test_random_3d_against_dense_solve():
    rng = np.random.default_rng(5)
    ps = PointSet(rng.standard_normal((6, 3)))
    f = factorize_simplex(ps, [0, 1, 2, 3])
    assert not f.singular
    q = rng.standard_normal(3)
    v = ps.data[[0, 1, 2, 3]]
    A = np.vstack([v.T, np.ones(4)])
    ref = np.linalg.solve(A, np.append(q, 1.0))  # coefficients of v0..v3
    lam = barycentric(f, ps, q)
    np.testing.assert_allclose(lam, np.append(ref[1:], ref[0]), atol=1e-10)


def test_barycentric_examples():
    f = factorize_simplex(TRI, [0, 1, 2])
    np.testing.assert_allclose(barycentric(f, TRI, [0.25, 0.25]), [0.25, 0.25, 0.5])
    np.testing.assert_allclose(barycentric(f, TRI, [1.0, 0.0]), [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(barycentric(f, TRI, [0.0, 0.0]), [0.0, 0.0, 1.0], atol=1e-15)


def test_centroid_4d():
    ps = PointSet(np.random.default_rng(2).standard_normal((7, 4)))
    f = factorize_simplex(ps, range(5))
    lam = barycentric(f, ps, ps.data[:5].mean(axis=0))
    np.testing.assert_allclose(lam, np.full(5, 0.2), atol=1e-9)


def test_contains_examples():
    f = factorize_simplex(BIG, [0, 1, 2])
    assert contains(f, BIG, [1.0, 1.0])
    assert not contains(f, BIG, [4.0, 4.0])
    assert contains(f, BIG, [2.0, 0.0])


def test_batch_contains_examples():
    f = factorize_simplex(BIG, [0, 1, 2])
    assert batch_contains(f, BIG, [0, 1, 2]).tolist() == [True, True, True]
    assert batch_contains(f, BIG, []).shape == (0,)


def test_batch_matches_single_calls():
    rng = np.random.default_rng(11)
    ps = PointSet(rng.standard_normal((100, 2)))
    f = factorize_simplex(ps, [3, 17, 42])
    got = batch_contains(f, ps, np.arange(100))
    want = np.array([contains(f, ps, ps.data[i]) for i in range(100)])
    assert np.array_equal(got, want)


def test_batch_factorization_matches_single():
    rng = np.random.default_rng(3)
    ps = PointSet(rng.standard_normal((20, 3)))
    subsets = np.array([rng.choice(20, 4, replace=False) for _ in range(50)])
    batch = factorize_batch(ps, subsets)
    table = batch_contains_many(batch, ps.data, query_indices=np.arange(20))
    for b in range(50):
        single = batch_contains(factorize_simplex(ps, subsets[b]), ps, np.arange(20))
        assert np.array_equal(table[b], single)


def test_degenerate_counter():
    ps = PointSet(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [5.0, 0.0]]))
    f = factorize_simplex(ps, [0, 1, 2])
    seen = {}
    contains(f, ps, [1.0, 1.0], counter=seen)
    assert seen.get("degenerate") == 1


coords = arrays(np.float64, (4, 2), elements=st.floats(-10, 10, allow_nan=False))
queries = arrays(np.float64, 2, elements=st.floats(-10, 10, allow_nan=False))
maps = arrays(np.float64, (2, 2), elements=st.floats(-3, 3, allow_nan=False))


def _general_position(v, q, margin=1e-3):
    A = np.vstack([v[:3].T, np.ones(3)])
    with np.errstate(all="ignore"):
        if not abs(np.linalg.det(A)) >= 0.5:
            return False
    lam = np.linalg.solve(A, np.append(q, 1.0))
    return bool(np.all(np.abs(lam) > margin))


@settings(max_examples=200, deadline=None)
@given(coords, queries, maps, queries)
def test_affine_invariance(v, q, M, shift):
    with np.errstate(all="ignore"):
        assume(abs(np.linalg.det(M)) > 0.1)
    assume(_general_position(v, q))
    before = contains(factorize_simplex(PointSet(v), [0, 1, 2]), PointSet(v), q)
    w = v @ M.T + shift
    after = contains(factorize_simplex(PointSet(w), [0, 1, 2]), PointSet(w), M @ q + shift)
    assert before == after


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (5, 3), elements=st.floats(-10, 10, allow_nan=False)), st.data())
def test_barycentric_reconstruction(v, data):
    ps = PointSet(v)
    f = factorize_simplex(ps, [0, 1, 2, 3])
    assume(not f.singular)
    A = np.vstack([v[:4].T, np.ones(4)])
    assume(np.linalg.cond(A) < 1e6)
    q = data.draw(arrays(np.float64, 3, elements=st.floats(-10, 10, allow_nan=False)))
    lam = barycentric(f, ps, q)
    verts = v[[1, 2, 3, 0]]
    recon = lam @ verts
    assert np.linalg.norm(recon - q) <= 1e-8 * max(1.0, np.linalg.norm(q))
    assert abs(lam.sum() - 1.0) < 1e-9


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (8, 2), elements=st.floats(-5, 5, allow_nan=False)),
       st.lists(st.integers(0, 7), min_size=3, max_size=3, unique=True))
def test_vertices_always_contained(v, idx):
    ps = PointSet(v)
    f = factorize_simplex(ps, idx)
    assume(not f.singular)
    assert batch_contains(f, ps, idx).all()


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (12, 2), elements=st.floats(-5, 5, allow_nan=False)),
       st.lists(st.integers(0, 11), min_size=3, max_size=3, unique=True))
def test_batch_equals_map(v, idx):
    ps = PointSet(v)
    f = factorize_simplex(ps, idx)
    got = batch_contains(f, ps, np.arange(12))
    want = [contains(f, ps, ps.data[i]) for i in range(12)]
    assert got.tolist() == want
