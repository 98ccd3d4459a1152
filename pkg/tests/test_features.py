import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import Delaunay

from harmonic_match.features import (
    LandmarkSet,
    chi2_distances,
    complement_similarity,
    delaunay_channel,
    distance_channel,
    distance_scales,
    frobenius_normalized,
    shape_context_channel,
    shape_context_histograms,
    uninformative_channel,
)
from harmonic_match.fourier import GraphChannel


def scipy_edges(pts):
    edges = set()
    for simplex in Delaunay(pts).simplices:
        a, b, c = sorted(simplex)
        edges |= {(a, b), (a, c), (b, c)}
    return edges


def channel_edges(ch):
    i, j = np.nonzero(np.triu(ch.A))
    return set(zip(i.tolist(), j.tolist()))


@given(st.integers(3, 14), st.integers(0, 2**31))
def test_delaunay_matches_scipy_in_general_position(n, seed):
    pts = np.random.default_rng(seed).uniform(size=(n, 2))
    assert channel_edges(delaunay_channel(pts)) == scipy_edges(pts)


def test_grid_edge_count():
    # 4x4 grid: 24 lattice edges plus one diagonal per unit square
    g = np.array([[x, y] for x in range(4) for y in range(4)], dtype=float)
    A = delaunay_channel(g).A
    assert A.sum() / 2 == 33
    assert np.array_equal(A, A.T)


def test_cocircular_square_is_deterministic():
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    edges = channel_edges(delaunay_channel(sq))
    assert len(edges) == 5
    assert {(0, 1), (1, 2), (2, 3), (0, 3)} <= edges
    assert channel_edges(delaunay_channel(sq)) == edges


def test_delaunay_errors():
    with pytest.raises(ValueError):
        delaunay_channel(np.zeros((2, 2)))
    with pytest.raises(ValueError, match="collinear"):
        delaunay_channel(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))


def test_landmark_validation():
    with pytest.raises(ValueError):
        LandmarkSet(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        LandmarkSet([[0.0, np.inf]])
    L = LandmarkSet([[0.0, 0.0], [3.0, 4.0]])
    assert L.mean_distance() == 5.0 and L.diameter() == 5.0


def test_distance_channel_kernel():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    A = distance_channel(pts, 1.0).A
    assert A[0, 1] == pytest.approx(np.exp(-0.5))
    assert A[0, 2] == pytest.approx(np.exp(-2.0))
    assert np.all(np.diag(A) == 0) and np.array_equal(A, A.T)
    with pytest.raises(ValueError):
        distance_channel(pts, 0.0)


def test_distance_scales_ladder():
    L = LandmarkSet([[0.0, 0.0], [2.0, 0.0]])
    assert np.allclose(distance_scales(L, 5), 2.0 * np.array([0.25, 0.5, 1.0, 2.0, 4.0]))


def test_shape_context_histograms(rng):
    pts = rng.uniform(size=(10, 2))
    H = shape_context_histograms(pts)
    assert H.shape == (10, 60)
    assert np.allclose(H.sum(axis=1), 1.0)
    # invariant to translation and uniform scaling
    assert np.allclose(shape_context_histograms(3.0 * pts + 7.0), H)


def test_chi2_disjoint_and_identical():
    H = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    D = chi2_distances(H)
    assert D[0, 1] == pytest.approx(2.0)
    assert D[0, 2] == 0.0
    assert np.all(np.diag(D) == 0)


def test_shape_channel_similarity(rng):
    pts = rng.uniform(size=(8, 2))
    dist = shape_context_channel(pts)
    sim = complement_similarity(dist)
    assert np.all(sim.A >= 0) and np.all(np.diag(sim.A) == 0)
    off = ~np.eye(8, dtype=bool)
    assert np.allclose(sim.A[off] + dist.A[off], dist.A.max())
    with pytest.raises(ValueError):
        shape_context_channel(np.zeros((1, 2)))


def test_uninformative_channel_reproducible():
    a = uninformative_channel(6, 3).A
    assert np.array_equal(a, uninformative_channel(6, 3).A)
    assert np.array_equal(a, a.T) and np.all(np.diag(a) == 0)
    assert np.all((a >= 0) & (a <= 1))
    with pytest.raises(ValueError):
        uninformative_channel(1, 0)


def test_frobenius_normalisation():
    ch = GraphChannel(np.array([[0.0, 3.0], [4.0, 0.0]]), "x")
    assert np.linalg.norm(frobenius_normalized(ch).A) == pytest.approx(1.0)
    zero = GraphChannel(np.zeros((2, 2)))
    assert frobenius_normalized(zero) is zero
