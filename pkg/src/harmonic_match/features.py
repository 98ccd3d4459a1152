"""Adjacency channels built from 2D landmark coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .fourier import GraphChannel


@dataclass
class LandmarkSet:
    points: np.ndarray
    frame_id: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"landmarks must be an (n, 2) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("landmark coordinates must be finite")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def mean_distance(self) -> float:
        return float(pdist(self.points).mean()) if self.n > 1 else 0.0

    def diameter(self) -> float:
        return float(pdist(self.points).max()) if self.n > 1 else 0.0


def _as_landmarks(L) -> LandmarkSet:
    return L if isinstance(L, LandmarkSet) else LandmarkSet(L)


# --- Delaunay ---------------------------------------------------------------


def _lower_face_triangles(pts: np.ndarray) -> list[tuple[int, int, int]]:
    """Delaunay triangles with co-circular ties broken by symbolic perturbation.

    Point p_l is lifted to height |p_l|^2 + eps_l with eps_0 >> eps_1 >> ...;
    a triangle survives when every other lifted point lies strictly above its
    plane. When the unperturbed height difference vanishes, the sign is set by
    the lowest-indexed point among the four involved.
    """
    n = len(pts)
    span = np.ptp(pts, axis=0).max()
    lifted = (pts**2).sum(axis=1)
    zero_tol = 1e-10 * max(span, 1e-300) ** 2
    area_tol = 1e-12 * max(span, 1e-300) ** 2
    idx = np.arange(n)
    out = []
    for a, b, c in combinations(range(n), 3):
        T = np.array([pts[b] - pts[a], pts[c] - pts[a]]).T
        det = np.linalg.det(T)
        if abs(det) <= area_tol:
            continue
        others = idx[(idx != a) & (idx != b) & (idx != c)]
        rel = np.linalg.solve(T, (pts[others] - pts[a]).T)  # barycentrics of b and c
        beta = np.vstack([1.0 - rel.sum(axis=0), rel[0], rel[1]])  # rows: a, b, c
        h0 = lifted[others] - beta.T @ lifted[[a, b, c]]
        above = h0 > zero_tol
        tied = np.abs(h0) <= zero_tol
        if tied.any():
            # a < b < c, so a is the lowest vertex index of the triangle
            low_is_l = others < a
            above = above | (tied & (low_is_l | (~low_is_l & (beta[0] < 0))))
        if np.all(above):
            out.append((a, b, c))
    return out


def delaunay_channel(L, label: str = "delaunay") -> GraphChannel:
    """Symmetric 0/1 matrix of Delaunay edges."""
    L = _as_landmarks(L)
    if L.n < 3:
        raise ValueError("Delaunay channel needs at least 3 points")
    triangles = _lower_face_triangles(L.points)
    if not triangles:
        raise ValueError("Delaunay channel undefined: all points are collinear")
    A = np.zeros((L.n, L.n))
    for a, b, c in triangles:
        for i, j in ((a, b), (b, c), (a, c)):
            A[i, j] = A[j, i] = 1.0
    return GraphChannel(A, label)


# --- distances --------------------------------------------------------------


def distance_channel(L, scale: float, label: str | None = None) -> GraphChannel:
    """Gaussian kernel exp(-|x_i - x_j|^2 / (2 scale^2)) off the diagonal."""
    L = _as_landmarks(L)
    if not scale > 0:
        raise ValueError("distance scale must be positive")
    sq = squareform(pdist(L.points, "sqeuclidean")) if L.n > 1 else np.zeros((L.n, L.n))
    A = np.exp(-sq / (2.0 * scale**2))
    np.fill_diagonal(A, 0.0)
    return GraphChannel(A, label or f"dist@{scale:.6g}")


def distance_scales(L, count: int = 5, low: float = 0.25, high: float = 4.0) -> np.ndarray:
    """Geometric ladder of kernel scales relative to the mean pairwise distance."""
    L = _as_landmarks(L)
    return L.mean_distance() * np.geomspace(low, high, count)


# --- shape context ----------------------------------------------------------


def shape_context_histograms(L, radial_bins: int = 5, angular_bins: int = 12) -> np.ndarray:
    """L1-normalised log-polar histograms, one row per point.

    Radii are divided by the mean pairwise distance and binned between 1/8
    and 2 on a log scale; points outside that range fall in the nearest
    radial bin.
    """
    L = _as_landmarks(L)
    n = L.n
    diff = L.points[None, :, :] - L.points[:, None, :]
    r = np.sqrt((diff**2).sum(axis=-1)) / L.mean_distance()
    theta = np.mod(np.arctan2(diff[..., 1], diff[..., 0]), 2 * np.pi)
    edges = np.geomspace(1 / 8, 2.0, radial_bins + 1)
    rbin = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, radial_bins - 1)
    abin = np.minimum((theta / (2 * np.pi / angular_bins)).astype(int), angular_bins - 1)
    H = np.zeros((n, radial_bins * angular_bins))
    for i in range(n):
        others = np.arange(n) != i
        np.add.at(H[i], rbin[i, others] * angular_bins + abin[i, others], 1.0)
    return H / H.sum(axis=1, keepdims=True)


def chi2_distances(H: np.ndarray) -> np.ndarray:
    """Pairwise sum_k (h_ik - h_jk)^2 / (h_ik + h_jk), with 0/0 taken as 0."""
    num = (H[:, None, :] - H[None, :, :]) ** 2
    den = H[:, None, :] + H[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    D = terms.sum(axis=-1)
    np.fill_diagonal(D, 0.0)
    return D


def shape_context_channel(L, radial_bins: int = 5, angular_bins: int = 12, label: str = "shape") -> GraphChannel:
    """Chi-squared distances between shape context descriptors."""
    L = _as_landmarks(L)
    if L.n < 2:
        raise ValueError("shape context channel needs at least 2 points")
    return GraphChannel(chi2_distances(shape_context_histograms(L, radial_bins, angular_bins)), label)


def complement_similarity(channel: GraphChannel) -> GraphChannel:
    """Turn a dissimilarity channel into a similarity: max entry minus each entry."""
    A = channel.A.max() - channel.A
    np.fill_diagonal(A, 0.0)
    return GraphChannel(A, channel.label)


# --- noise ------------------------------------------------------------------


def uninformative_channel(n: int, seed, label: str = "uninf") -> GraphChannel:
    """Symmetric matrix with i.i.d. uniform(0, 1) entries above the diagonal."""
    if n < 2:
        raise ValueError("uninformative channel needs n >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    upper = np.triu(rng.uniform(0.0, 1.0, size=(n, n)), k=1)
    return GraphChannel(upper + upper.T, label)


def frobenius_normalized(channel: GraphChannel) -> GraphChannel:
    norm = np.linalg.norm(channel.A)
    if norm == 0:
        return channel
    return GraphChannel(channel.A / norm, channel.label)
