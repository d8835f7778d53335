"""k-nearest neighborhoods, local PCA tangent frames, and tangent projection.

For each base point x_i the k nearest cloud points (the base itself first)
feed a covariance eigendecomposition; the top two eigenvectors span the
estimated tangent plane, the third the normal. Neighbors are then expressed
in tangent coordinates v = (t1.(x - x_i), t2.(x - x_i)) with the leftover
normal component recorded separately.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateNeighborhoodError
from .sampling import PointCloud


@dataclass
class NeighborSet:
    base_index: int
    indices: np.ndarray    # (k,) global ids, base first, then by (distance, index)
    distances: np.ndarray  # (k,) nondecreasing


@dataclass
class TangentFrame:
    base_index: int
    basis: np.ndarray        # (3, 3) orthonormal columns t1, t2, t3 (normal last)
    eigenvalues: np.ndarray  # (3,) PCA eigenvalues, descending
    intrinsic_dim: int = 2

    @property
    def tangent(self) -> np.ndarray:
        return self.basis[:, : self.intrinsic_dim]

    @property
    def normal(self) -> np.ndarray:
        return self.basis[:, self.intrinsic_dim]


@dataclass
class ProjectedNeighborhood:
    base_index: int
    frame: TangentFrame
    indices: np.ndarray       # (k,) global ids, row 0 = base
    coords: np.ndarray        # (k, 2) tangent coordinates, row 0 = 0
    normal_comps: np.ndarray  # (k,) normal components, row 0 = 0
    radius: float             # max tangent-coordinate norm

    @property
    def k(self) -> int:
        return self.indices.shape[0]


def default_neighborhood_size(n_points: int) -> int:
    """k = max(12, ceil(2 log2 n)); grows slowly, stays above the 6 GMLS dof."""
    if n_points < 2:
        raise ValueError("need at least two points")
    return max(12, math.ceil(2.0 * math.log2(n_points)))


class NeighborIndex:
    """kd-tree over a cloud answering exact kNN queries with deterministic ties.

    Ties in distance are broken by ascending point index (lexsort post-pass),
    so results do not depend on tree internals.
    """

    def __init__(self, cloud: PointCloud):
        self.cloud = cloud
        self._tree = cKDTree(cloud.points)

    def query(self, base_index: int, k: int) -> NeighborSet:
        idx, dist = self._query_block(self.cloud.points[base_index : base_index + 1], k)
        out = NeighborSet(base_index, idx[0], dist[0])
        if out.indices[0] != base_index:
            # base not first can only happen via a duplicate point at distance 0
            where = np.nonzero(out.indices == base_index)[0]
            if where.size == 0:
                raise ValueError("base point not among its own neighbors")
            j = int(where[0])
            order = np.r_[j, np.delete(np.arange(k), j)]
            out = NeighborSet(base_index, out.indices[order], out.distances[order])
        return out

    def query_all(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(n, k) index and distance arrays for every point, base first."""
        idx, dist = self._query_block(self.cloud.points, k)
        base = np.arange(self.cloud.n_points)
        wrong = idx[:, 0] != base
        for i in np.nonzero(wrong)[0]:
            row = np.nonzero(idx[i] == i)[0]
            if row.size == 0:
                raise ValueError(f"point {i} not among its own neighbors")
            j = int(row[0])
            order = np.r_[j, np.delete(np.arange(k), j)]
            idx[i] = idx[i, order]
            dist[i] = dist[i, order]
        return idx, dist

    def _query_block(self, pts: np.ndarray, k: int):
        if k < 1:
            raise ValueError("k must be at least 1")
        if k > self.cloud.n_points:
            raise ValueError(f"k={k} exceeds cloud size {self.cloud.n_points}")
        dist, idx = self._tree.query(pts, k=k)
        # k=1 collapses the trailing axis; restore the (m, k) shape
        dist = np.asarray(dist, dtype=np.float64).reshape(len(pts), k)
        idx = np.asarray(idx, dtype=np.intp).reshape(len(pts), k)
        # deterministic ordering on ties: sort each row by (distance, index)
        order = np.lexsort((idx, dist), axis=1)
        return (
            np.take_along_axis(idx, order, axis=1),
            np.take_along_axis(dist, order, axis=1),
        )


def knn(cloud: PointCloud, base_index: int, k: int) -> NeighborSet:
    """One-off kNN query; builds a throwaway tree, fine for tests and small runs."""
    return NeighborIndex(cloud).query(base_index, k)


def _frame_from_covariance(cov: np.ndarray, base_index: int, intrinsic_dim: int | None,
                           gap_threshold: float) -> TangentFrame:
    evals, evecs = np.linalg.eigh(cov)
    evals = evals[::-1].copy()
    evecs = evecs[:, ::-1].copy()
    evals[evals < 0] = 0.0
    if intrinsic_dim is None:
        # pick d at the largest relative gap, require it to be decisive
        ratios = evals[:-1] / np.maximum(evals[1:], 1e-300)
        d = int(np.argmax(ratios)) + 1
        if ratios[d - 1] < gap_threshold:
            raise DegenerateNeighborhoodError(
                f"no decisive eigenvalue gap at point {base_index}: ratios {ratios}"
            )
    else:
        d = intrinsic_dim
    if evals[d - 1] <= 1e-13 * max(evals[0], 1e-300):
        raise DegenerateNeighborhoodError(
            f"covariance at point {base_index} has numerical rank < {d}"
        )
    # deterministic sign: largest-magnitude entry of each axis positive
    for c in range(evecs.shape[1]):
        j = int(np.argmax(np.abs(evecs[:, c])))
        if evecs[j, c] < 0:
            evecs[:, c] = -evecs[:, c]
    return TangentFrame(base_index, evecs, evals, intrinsic_dim=d)


def local_pca(cloud: PointCloud, neighbors: NeighborSet, intrinsic_dim: int | None = 2,
              gap_threshold: float = 5.0) -> TangentFrame:
    """Tangent frame from the neighbor covariance sum (x - mu)(x - mu)^T.

    With intrinsic_dim=None the dimension is chosen at the largest relative
    eigenvalue gap and must clear gap_threshold, else the neighborhood is
    declared degenerate and an explicit dimension is required.
    """
    pts = cloud.points[neighbors.indices]
    mu = pts.mean(axis=0)
    centered = pts - mu
    cov = centered.T @ centered
    return _frame_from_covariance(cov, neighbors.base_index, intrinsic_dim, gap_threshold)


def local_pca_all(cloud: PointCloud, idx: np.ndarray, intrinsic_dim: int = 2) -> list[TangentFrame]:
    """Vectorized frames for every point; idx is the (n, k) kNN index matrix."""
    pts = cloud.points[idx]                       # (n, k, 3)
    mu = pts.mean(axis=1, keepdims=True)
    centered = pts - mu
    cov = np.einsum("nka,nkb->nab", centered, centered)
    evals, evecs = np.linalg.eigh(cov)            # ascending
    evals = evals[:, ::-1]
    evecs = evecs[:, :, ::-1]
    n = cloud.n_points
    frames = []
    scale = np.maximum(evals[:, 0], 1e-300)
    if np.any(evals[:, intrinsic_dim - 1] <= 1e-13 * scale):
        bad = int(np.nonzero(evals[:, intrinsic_dim - 1] <= 1e-13 * scale)[0][0])
        raise DegenerateNeighborhoodError(f"covariance at point {bad} has numerical rank < {intrinsic_dim}")
    # deterministic sign fix, vectorized over points and axes
    jmax = np.argmax(np.abs(evecs), axis=1)       # (n, 3)
    signs = np.sign(np.take_along_axis(evecs, jmax[:, None, :], axis=1))[:, 0, :]
    signs[signs == 0] = 1.0
    evecs = evecs * signs[:, None, :]
    for i in range(n):
        frames.append(TangentFrame(i, evecs[i].copy(), np.maximum(evals[i], 0.0).copy(),
                                   intrinsic_dim=intrinsic_dim))
    return frames


def project_neighborhood(cloud: PointCloud, frame: TangentFrame,
                         neighbors: NeighborSet) -> ProjectedNeighborhood:
    """Express neighbors in the base frame: tangent coords + normal component."""
    if frame.base_index != neighbors.base_index:
        raise ValueError("frame and neighbor set refer to different base points")
    rel = cloud.points[neighbors.indices] - cloud.points[neighbors.base_index]
    coords = rel @ frame.tangent                  # (k, 2)
    normal = rel @ frame.normal                   # (k,)
    coords[0] = 0.0                               # exact zero for the base row
    normal[0] = 0.0
    radius = float(np.linalg.norm(coords, axis=1).max())
    return ProjectedNeighborhood(
        base_index=neighbors.base_index,
        frame=frame,
        indices=neighbors.indices.copy(),
        coords=coords,
        normal_comps=normal,
        radius=radius,
    )
