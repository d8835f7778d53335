"""End-to-end orchestration: cloud -> frames -> rings -> charts -> pencil -> modes.

The geometry stage (neighborhoods, PCA frames, first rings, quadratic charts)
is independent of the operator, so one GeometryBundle can feed several
assemblies over the same cloud. Per-point failures (degenerate neighborhoods,
empty rings, ill-conditioned chart fits) disable that point's one-sided
contribution and are charged against the assembly drop budget instead of
aborting the run; strict=True restores fail-fast behavior.
"""

from dataclasses import dataclass, field

import numpy as np

from .assembly import DROP_BUDGET, OperatorPencil, assemble_pencil
from .charts import fit_chart
from .eigensolve import EigenResult, solve_smallest
from .errors import (
    DegenerateNeighborhoodError,
    EmptyRingError,
    IllConditionedFitError,
    InsufficientNeighborsError,
)
from .rings import delaunay_first_ring
from .sampling import PointCloud
from .tangent import (
    NeighborIndex,
    NeighborSet,
    default_neighborhood_size,
    local_pca_all,
    project_neighborhood,
)

_POINT_FAILURES = (
    DegenerateNeighborhoodError,
    EmptyRingError,
    IllConditionedFitError,
    InsufficientNeighborsError,
)


@dataclass
class GeometryBundle:
    """Operator-independent local geometry for every point of a cloud."""

    cloud: PointCloud
    k: int
    frames: list                     # TangentFrame per point
    rings: list                      # FirstRing or None per point
    charts: list                     # GmlsChart or None per point
    neighbor_indices: np.ndarray     # (n, k) kNN ids, base first
    failures: dict = field(default_factory=dict)  # point id -> reason

    @property
    def n_points(self) -> int:
        return self.cloud.n_points

    @property
    def n_failed(self) -> int:
        return len(self.failures)


def build_geometry(cloud: PointCloud, k: int | None = None,
                   strict: bool = False) -> GeometryBundle:
    """Frames, first rings and charts for every point of the cloud."""
    n = cloud.n_points
    if k is None:
        k = default_neighborhood_size(n)
    if k > n:
        raise ValueError(f"neighborhood size k={k} exceeds cloud size {n}")
    index = NeighborIndex(cloud)
    idx, dist = index.query_all(k)
    frames = local_pca_all(cloud, idx)
    rings: list = [None] * n
    charts: list = [None] * n
    failures: dict = {}
    for i in range(n):
        nbrs = NeighborSet(i, idx[i], dist[i])
        try:
            proj = project_neighborhood(cloud, frames[i], nbrs)
            charts[i] = fit_chart(proj)
            rings[i] = delaunay_first_ring(proj)
        except _POINT_FAILURES as exc:
            if strict:
                raise
            rings[i] = None
            charts[i] = None
            failures[i] = f"{type(exc).__name__}: {exc}"
    return GeometryBundle(cloud=cloud, k=k, frames=frames, rings=rings,
                          charts=charts, neighbor_indices=idx, failures=failures)


def build_pencil(operator: str, cloud: PointCloud | None = None, *,
                 geometry: GeometryBundle | None = None, k: int | None = None,
                 frame_mode: str = "full", metric_mode: str = "curved",
                 stiffness_rule="vertex", mass_rule="midpoint",
                 drop_budget: float = DROP_BUDGET,
                 strict: bool = False) -> tuple[OperatorPencil, GeometryBundle]:
    """Assemble the (A, B) pencil, building (or reusing) the geometry."""
    if geometry is None:
        if cloud is None:
            raise ValueError("either a cloud or a prebuilt geometry is required")
        geometry = build_geometry(cloud, k=k, strict=strict)
    pencil = assemble_pencil(operator, geometry.cloud, geometry.frames,
                             geometry.rings, geometry.charts,
                             frame_mode=frame_mode, metric_mode=metric_mode,
                             stiffness_rule=stiffness_rule, mass_rule=mass_rule,
                             drop_budget=drop_budget)
    return pencil, geometry


def solve_pencil(pencil: OperatorPencil, n_modes: int, *,
                 tol: float = 1e-8, sigma: float | None = None,
                 maxiter: int = 500) -> EigenResult:
    return solve_smallest(pencil.stiffness, pencil.mass, n_modes,
                          tol=tol, sigma=sigma, maxiter=maxiter)


def estimate_spectrum(operator: str, cloud: PointCloud, n_modes: int, *,
                      k: int | None = None, frame_mode: str = "full",
                      metric_mode: str = "curved", tol: float = 1e-8,
                      sigma: float | None = None,
                      geometry: GeometryBundle | None = None):
    """Cloud to eigenpairs in one call.

    Returns (result, pencil, geometry) so callers can reuse the geometry for
    a second operator or inspect assembly statistics.
    """
    pencil, geometry = build_pencil(operator, cloud, geometry=geometry, k=k,
                                    frame_mode=frame_mode, metric_mode=metric_mode)
    result = solve_pencil(pencil, n_modes, tol=tol, sigma=sigma)
    return result, pencil, geometry
