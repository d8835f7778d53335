"""Shared fixtures: small point clouds, prebuilt geometry, flat reference meshes.

The flat structured-grid bundle is constructed by hand (rings, identity
frames, zero quadratic charts) rather than through the pipeline so that
tests have a setting where every assembled quantity is known in closed form
and independent of Delaunay tie-breaking on cocircular grid points.
"""

import numpy as np
import pytest

from curvedmesh.charts import GmlsChart
from curvedmesh.pipeline import GeometryBundle, build_geometry
from curvedmesh.rings import FirstRing, RingTriangle
from curvedmesh.sampling import PointCloud, sample_sphere, sample_torus
from curvedmesh.tangent import TangentFrame

# ring-triangle neighbor offset pairs around an interior vertex of the
# unit-square grid triangulated with all diagonals along (+1, +1)
GRID_RING_OFFSETS = [
    ((1, 0), (1, 1)),
    ((1, 1), (0, 1)),
    ((0, 1), (-1, 0)),
    ((-1, 0), (-1, -1)),
    ((-1, -1), (0, -1)),
    ((0, -1), (1, 0)),
]


def identity_frame(i: int) -> TangentFrame:
    return TangentFrame(i, np.eye(3), np.array([1.0, 1.0, 0.0]), intrinsic_dim=2)


def zero_chart(i: int) -> GmlsChart:
    return GmlsChart(i, np.zeros(6), residual=0.0, cond=1.0)


def build_flat_grid(nx: int, ny: int, *, spacing: float = 1.0) -> GeometryBundle:
    """GeometryBundle for a flat nx-by-ny grid in the z = 0 plane.

    Every vertex gets the subset of the six canonical ring triangles that
    stays inside the grid, an identity tangent frame, and a zero chart, so
    the assembled operators have closed-form flat-space values.
    """
    n = nx * ny
    pts = np.zeros((n, 3))
    for j in range(ny):
        for i in range(nx):
            pts[j * nx + i, :2] = (i * spacing, j * spacing)
    cloud = PointCloud(points=pts, provenance="file")
    frames = [identity_frame(i) for i in range(n)]
    charts = [zero_chart(i) for i in range(n)]
    rings = []
    for j in range(ny):
        for i in range(nx):
            tris = []
            for (o1, o2) in GRID_RING_OFFSETS:
                p1 = (i + o1[0], j + o1[1])
                p2 = (i + o2[0], j + o2[1])
                if not all(0 <= p[0] < nx and 0 <= p[1] < ny for p in (p1, p2)):
                    continue
                tris.append(RingTriangle(
                    base=j * nx + i,
                    i1=p1[1] * nx + p1[0],
                    i2=p2[1] * nx + p2[0],
                    v1=np.array([float(o1[0]), float(o1[1])]) * spacing,
                    v2=np.array([float(o2[0]), float(o2[1])]) * spacing,
                ))
            rings.append(FirstRing(base=j * nx + i, triangles=tris, n_dropped=0))
    nbrs = np.tile(np.arange(n), (n, 1))[:, : min(n, 7)]  # placeholder table
    return GeometryBundle(cloud=cloud, k=min(n, 7), frames=frames, rings=rings,
                          charts=charts, neighbor_indices=nbrs, failures={})


def interior_vertices(nx: int, ny: int) -> list:
    return [j * nx + i for j in range(1, ny - 1) for i in range(1, nx - 1)]


def build_single_triangle() -> GeometryBundle:
    """Three points spanning one right triangle; each vertex rings the triangle."""
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    cloud = PointCloud(points=pts, provenance="file")
    frames = [identity_frame(i) for i in range(3)]
    charts = [zero_chart(i) for i in range(3)]
    corners = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    rings = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        rings.append(FirstRing(base=i, triangles=[RingTriangle(
            base=i, i1=j, i2=k, v1=corners[j] - corners[i], v2=corners[k] - corners[i],
        )], n_dropped=0))
    nbrs = np.array([[0, 1, 2], [1, 0, 2], [2, 0, 1]])
    return GeometryBundle(cloud=cloud, k=3, frames=frames, rings=rings,
                          charts=charts, neighbor_indices=nbrs, failures={})


@pytest.fixture(scope="session")
def sphere400():
    cloud = sample_sphere(400, seed=11)
    return cloud, build_geometry(cloud)


@pytest.fixture(scope="session")
def sphere2000():
    cloud = sample_sphere(2000, seed=23)
    return cloud, build_geometry(cloud)


@pytest.fixture(scope="session")
def torus1500():
    cloud = sample_torus(1500, seed=31)
    return cloud, build_geometry(cloud)


@pytest.fixture(scope="session")
def flat_grid_9x9():
    return build_flat_grid(9, 9)


@pytest.fixture()
def single_triangle():
    return build_single_triangle()
