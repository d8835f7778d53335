"""Exception types raised by the curvedmesh pipeline.

Invalid arguments raise plain ValueError; everything that can fail for
numerical/geometric reasons gets its own class so callers (and the CLI
exit-code mapping) can tell configuration mistakes from data problems.
"""


class CurvedMeshError(RuntimeError):
    """Base class for numerical/geometric failures in the pipeline."""


class DegenerateNeighborhoodError(CurvedMeshError):
    """Neighborhood has no usable 2D structure (rank-deficient PCA,
    collinear projection, or no eigenvalue gap at the requested dimension)."""


class InsufficientNeighborsError(CurvedMeshError):
    """Fewer neighbors than unknowns for the requested fit."""


class IllConditionedFitError(CurvedMeshError):
    """Least-squares design matrix condition number above the safety cap."""


class EmptyRingError(CurvedMeshError):
    """Local triangulation produced no triangles incident to the base point."""


class DegenerateTriangleError(CurvedMeshError):
    """Triangle area below the relative floor; unusable for quadrature."""


class TriangleBudgetError(CurvedMeshError):
    """Too large a fraction of candidate triangles was dropped during assembly."""


class IndefiniteMassError(CurvedMeshError):
    """Mass matrix failed the positive-definiteness check."""


class EigenConvergenceError(CurvedMeshError):
    """Iterative eigensolver missed the residual tolerance within budget."""

    def __init__(self, message, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


class OracleUnconvergedError(CurvedMeshError):
    """Self-consistency check of a semi-analytic reference failed."""


class UnsupportedLevelError(ValueError):
    """Closed-form eigenfields are only tabulated for the first few levels."""


class AmbiguousClusterError(CurvedMeshError):
    """Estimated eigenvalue cluster cannot be matched to a unique level."""


class SamplingBudgetError(CurvedMeshError):
    """Rejection sampler exceeded its proposal budget."""
