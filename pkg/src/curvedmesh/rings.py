"""Local first-ring meshes from 2D Delaunay triangulations.

Each projected neighborhood is triangulated in its tangent coordinates and
only the triangles incident to the base point (local vertex 0) are kept.
Those first rings are the integration domains for all weak-form assembly;
no global mesh is ever built.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import DegenerateNeighborhoodError, EmptyRingError
from .sampling import PointCloud
from .tangent import ProjectedNeighborhood

# triangles with projected area below this times radius^2 are unusable
AREA_REL_FLOOR = 1e-12


@dataclass
class RingTriangle:
    """One first-ring triangle in tangent coordinates.

    The base point sits at the origin; v1 and v2 are the other two vertices.
    Reference-simplex convention: barycentric (u1, u2) with u1 + u2 <= 1,
    (0,0) -> base, (1,0) -> v1, (0,1) -> v2.
    """

    base: int        # global index of the base point
    i1: int          # global index of the vertex at (1, 0)
    i2: int          # global index of the vertex at (0, 1)
    v1: np.ndarray   # (2,) tangent coordinates of vertex i1
    v2: np.ndarray   # (2,) tangent coordinates of vertex i2

    @property
    def area(self) -> float:
        return 0.5 * abs(self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0])

    def swapped(self) -> "RingTriangle":
        return RingTriangle(self.base, self.i2, self.i1, self.v2, self.v1)


@dataclass
class FirstRing:
    base: int
    triangles: list
    n_dropped: int = 0

    @property
    def neighbor_ids(self) -> np.ndarray:
        ids = set()
        for t in self.triangles:
            ids.add(t.i1)
            ids.add(t.i2)
        return np.array(sorted(ids), dtype=np.int64)


def barycentric_point(tri: RingTriangle, u: np.ndarray) -> np.ndarray:
    """Map reference coordinates (u1, u2) to tangent coordinates u1 v1 + u2 v2."""
    u = np.asarray(u, dtype=np.float64)
    if u.min() < -1e-12 or u.sum() > 1 + 1e-12:
        raise ValueError(f"barycentric coordinates {u} outside the reference simplex")
    return u[0] * tri.v1 + u[1] * tri.v2


def linear_mesh_metric(cloud: PointCloud, tri: RingTriangle) -> np.ndarray:
    """Constant metric of the flat (straight-edge) triangle in ambient space:
    the Gram matrix of the edge vectors x_{i1} - x_base, x_{i2} - x_base."""
    e1 = cloud.points[tri.i1] - cloud.points[tri.base]
    e2 = cloud.points[tri.i2] - cloud.points[tri.base]
    return np.array([[e1 @ e1, e1 @ e2], [e1 @ e2, e2 @ e2]])


def delaunay_first_ring(proj: ProjectedNeighborhood,
                        area_rel_floor: float = AREA_REL_FLOOR) -> FirstRing:
    """Triangulate the projected neighborhood, keep triangles at the base.

    Raises DegenerateNeighborhoodError when the 2D points admit no
    triangulation (collinear/coincident) and EmptyRingError when no triangle
    incident to the base survives the area floor.
    """
    pts = proj.coords
    if pts.shape[0] < 3:
        raise DegenerateNeighborhoodError(
            f"neighborhood of point {proj.base_index} has fewer than 3 points"
        )
    try:
        dela = Delaunay(pts)
    except QhullError as exc:
        raise DegenerateNeighborhoodError(
            f"Delaunay triangulation failed at point {proj.base_index}: {exc}"
        ) from exc
    floor = area_rel_floor * proj.radius**2
    triangles = []
    n_dropped = 0
    simplices = dela.simplices
    # keep a deterministic order independent of qhull internals
    hit = simplices[np.any(simplices == 0, axis=1)]
    keys = np.sort(hit, axis=1)
    hit = hit[np.lexsort((keys[:, 2], keys[:, 1]))]
    for simplex in hit:
        others = [int(s) for s in simplex if s != 0]
        if len(others) != 2:
            n_dropped += 1
            continue
        a, b = sorted(others)
        tri = RingTriangle(
            base=proj.base_index,
            i1=int(proj.indices[a]),
            i2=int(proj.indices[b]),
            v1=pts[a].copy(),
            v2=pts[b].copy(),
        )
        if tri.area < floor:
            n_dropped += 1
            continue
        triangles.append(tri)
    if not triangles:
        raise EmptyRingError(
            f"no usable triangles incident to point {proj.base_index}"
        )
    return FirstRing(proj.base_index, triangles, n_dropped)
