"""Weak-form Laplacians on unknown 2D surfaces from raw point clouds.

The pipeline builds, per sample point, a projected k-nearest neighborhood,
a local PCA tangent frame, a Delaunay first ring, and a quadratic moving
least squares chart; ring triangles pulled back through the chart carry a
non-constant metric whose closed-form Christoffel data feeds vectorized
FEM-style assembly of the Laplace-Beltrami, Bochner, and Hodge 1-Laplacian
pencils (A, B). Smallest eigenpairs come from a shift-invert Lanczos solve,
and spectra/eigenfields are benchmarked against closed-form sphere
references and a finite-difference torus oracle.
"""

__version__ = "0.1.0"

from .analytic import (
    AnalyticSpectrum,
    sphere_eigenfields,
    sphere_spectrum,
    torus_hodge_spectrum_fd,
    torus_lb_spectrum_fd,
)
from .assembly import OperatorPencil, assemble_pencil
from .bench import run_benchmark, run_sweep
from .config import RunConfig, load_config
from .eigensolve import EigenResult, pencil_diagnostics, solve_smallest
from .errors import (
    AmbiguousClusterError,
    CurvedMeshError,
    DegenerateNeighborhoodError,
    DegenerateTriangleError,
    EigenConvergenceError,
    EmptyRingError,
    IllConditionedFitError,
    IndefiniteMassError,
    InsufficientNeighborsError,
    OracleUnconvergedError,
    SamplingBudgetError,
    TriangleBudgetError,
    UnsupportedLevelError,
)
from .io import read_pencil, write_pencil
from .metrics import (
    cluster_by_gap,
    eigenvalue_error,
    eigenvector_error,
    fit_convergence_rate,
)
from .pipeline import (
    GeometryBundle,
    build_geometry,
    build_pencil,
    estimate_spectrum,
    solve_pencil,
)
from .sampling import (
    PointCloud,
    add_radial_noise,
    load_csv,
    sample_sphere,
    sample_torus,
    save_csv,
)
from .tangent import TangentFrame, default_neighborhood_size

__all__ = [
    "__version__",
    "AnalyticSpectrum",
    "sphere_eigenfields",
    "sphere_spectrum",
    "torus_hodge_spectrum_fd",
    "torus_lb_spectrum_fd",
    "OperatorPencil",
    "assemble_pencil",
    "run_benchmark",
    "run_sweep",
    "RunConfig",
    "load_config",
    "EigenResult",
    "pencil_diagnostics",
    "solve_smallest",
    "AmbiguousClusterError",
    "CurvedMeshError",
    "DegenerateNeighborhoodError",
    "DegenerateTriangleError",
    "EigenConvergenceError",
    "EmptyRingError",
    "IllConditionedFitError",
    "IndefiniteMassError",
    "InsufficientNeighborsError",
    "OracleUnconvergedError",
    "SamplingBudgetError",
    "TriangleBudgetError",
    "UnsupportedLevelError",
    "read_pencil",
    "write_pencil",
    "cluster_by_gap",
    "eigenvalue_error",
    "eigenvector_error",
    "fit_convergence_rate",
    "GeometryBundle",
    "build_geometry",
    "build_pencil",
    "estimate_spectrum",
    "solve_pencil",
    "PointCloud",
    "add_radial_noise",
    "load_csv",
    "sample_sphere",
    "sample_torus",
    "save_csv",
    "TangentFrame",
    "default_neighborhood_size",
]
