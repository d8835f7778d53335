"""Point cloud generation for benchmark manifolds.

Samples live in R^3 on the unit sphere or on the torus
(x, y, z) = ((2 + cos th) cos ph, (2 + cos th) sin ph, sin th),
optionally perturbed by multiplicative radial noise. All randomness comes
from NumPy's default_rng (PCG64), a named, seedable generator whose streams
are reproducible across platforms, so a (manifold, n, seed) triple pins the
cloud exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingBudgetError


@dataclass
class PointCloud:
    """A finite sample of an embedded manifold.

    points : (n_points, ambient_dim) float array
    provenance : one of "sphere", "torus", "noisy_sphere", "file"
    """

    points: np.ndarray
    ambient_dim: int = 3
    intrinsic_dim_hint: int = 2
    seed: int | None = None
    provenance: str = "file"
    noise_level: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError("points must be a 2D array")
        if self.points.shape[1] != self.ambient_dim:
            raise ValueError(
                f"points have {self.points.shape[1]} columns, expected ambient_dim={self.ambient_dim}"
            )

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def sample_sphere(n_points: int, seed: int) -> PointCloud:
    """Draw n_points uniformly on the unit sphere S^2.

    Isotropic Gaussians normalized to unit length; rows with pathologically
    small norm are redrawn so the normalization is always well defined.
    """
    if n_points < 1:
        raise ValueError("n_points must be positive")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_points, 3))
    norms = np.linalg.norm(x, axis=1)
    bad = norms < 1e-12
    while np.any(bad):  # probability ~ 0, but keeps the contract airtight
        x[bad] = rng.standard_normal((int(bad.sum()), 3))
        norms = np.linalg.norm(x, axis=1)
        bad = norms < 1e-12
    x /= norms[:, None]
    return PointCloud(x, seed=seed, provenance="sphere")


def torus_embedding(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Embed (theta, phi) angles into R^3 for the (R, r) = (2, 1) torus."""
    w = 2.0 + np.cos(theta)
    return np.column_stack([w * np.cos(phi), w * np.sin(phi), np.sin(theta)])


def sample_torus(n_points: int, seed: int, max_proposal_factor: int = 100) -> PointCloud:
    """Draw n_points uniformly (w.r.t. surface area) on the (2, 1) torus.

    Proposals are uniform in (theta, phi); a proposal is kept when
    u <= (2 + cos theta) / 3, which weights by the area element. Raises
    SamplingBudgetError if more than max_proposal_factor * n_points
    proposals are consumed (expected acceptance rate is 2/3).
    """
    if n_points < 1:
        raise ValueError("n_points must be positive")
    rng = np.random.default_rng(seed)
    budget = max_proposal_factor * n_points
    used = 0
    thetas = []
    phis = []
    have = 0
    while have < n_points:
        m = min(max(2 * (n_points - have), 1024), budget - used)
        if m <= 0:
            raise SamplingBudgetError(
                f"torus rejection sampler used {used} proposals for {have}/{n_points} accepted points"
            )
        theta = rng.uniform(0.0, 2.0 * np.pi, m)
        phi = rng.uniform(0.0, 2.0 * np.pi, m)
        u = rng.uniform(0.0, 1.0, m)
        used += m
        keep = u <= (2.0 + np.cos(theta)) / 3.0
        thetas.append(theta[keep])
        phis.append(phi[keep])
        have += int(keep.sum())
    theta = np.concatenate(thetas)[:n_points]
    phi = np.concatenate(phis)[:n_points]
    cloud = PointCloud(torus_embedding(theta, phi), seed=seed, provenance="torus")
    cloud.meta["proposals_used"] = used
    cloud.meta["acceptance_rate"] = have / used
    return cloud


def add_radial_noise(cloud: PointCloud, eta: float, seed: int) -> PointCloud:
    """Perturb sphere points radially: x -> (1 + eps) x, eps ~ U[-eta/2, eta/2].

    Only meaningful for clouds centered at the origin (sphere provenance);
    eta = 0 returns a copy with identical coordinates.
    """
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    if cloud.provenance not in ("sphere", "noisy_sphere"):
        raise ValueError("radial noise is defined for sphere clouds")
    rng = np.random.default_rng(seed)
    eps = rng.uniform(-eta / 2.0, eta / 2.0, cloud.n_points)
    pts = cloud.points * (1.0 + eps)[:, None]
    out = PointCloud(pts, seed=cloud.seed, provenance="noisy_sphere", noise_level=eta)
    out.meta["noise_seed"] = seed
    return out


def save_csv(cloud: PointCloud, path, header: bool = False) -> None:
    """Write one point per row, comma-separated, '.' decimal, full precision.

    With header=True a single comment line "# n=<ambient_dim>" is emitted.
    """
    lines = []
    if header:
        lines.append(f"# n={cloud.ambient_dim}")
    for row in cloud.points:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_csv(path) -> PointCloud:
    """Read a comma-separated point cloud; '#' lines are comments."""
    pts = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if pts.size == 0:
        raise ValueError(f"no points found in {path}")
    return PointCloud(pts, ambient_dim=pts.shape[1], provenance="file")
