"""Spectral error metrics, gap clustering, and convergence-rate fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import AnalyticSpectrum, sphere_eigenfield_levels
from .errors import AmbiguousClusterError
from .sampling import PointCloud
from .tangent import TangentFrame


def eigenvalue_error(
    estimated: np.ndarray,
    spectrum: AnalyticSpectrum,
    n_modes: int,
    zero_tol: float = 1e-8,
) -> float:
    """Mean relative error of the first n_modes nontrivial eigenvalues.

    The reference kernel dimension (number of analytic zero modes) is
    dropped from the low end of the estimated list before comparison, so
    the metric always pairs nontrivial modes with nontrivial modes.
    """
    estimated = np.sort(np.asarray(estimated, dtype=float))
    n_zero = spectrum.n_zero_modes(zero_tol)
    if estimated.size < n_zero + n_modes:
        raise ValueError(
            f"need at least {n_zero + n_modes} estimated eigenvalues, got {estimated.size}"
        )
    est = estimated[n_zero:n_zero + n_modes]
    ref = spectrum.nontrivial(zero_tol).expand(n_modes)
    return float(np.mean(np.abs(est - ref) / ref))


def cluster_by_gap(
    values: np.ndarray,
    theta: float = 0.5,
    floor_frac: float = 1e-3,
) -> list[np.ndarray]:
    """Split a sorted eigenvalue list into clusters at large relative gaps.

    A new cluster starts after index i when the gap to the next value
    exceeds theta * max(values[i], floor) with floor = floor_frac * max|values|.
    Returns index arrays into the sorted order.
    """
    values = np.asarray(values, dtype=float)
    order = np.argsort(values)
    svals = values[order]
    if svals.size == 0:
        return []
    floor = floor_frac * max(np.abs(svals).max(), 1e-300)
    clusters = []
    start = 0
    for i in range(svals.size - 1):
        gap = svals[i + 1] - svals[i]
        if gap > theta * max(svals[i], floor):
            clusters.append(order[start:i + 1])
            start = i + 1
    clusters.append(order[start:])
    return clusters


def lift_field(w: np.ndarray, frames: list[TangentFrame]) -> np.ndarray:
    """Expand a coefficient vector (2N,) into an ambient field (N, 3)."""
    w = np.asarray(w, dtype=float)
    n = len(frames)
    if w.shape != (2 * n,):
        raise ValueError(f"coefficient vector has shape {w.shape}, expected ({2 * n},)")
    coeffs = w.reshape(n, 2)
    tangents = np.stack([f.tangent for f in frames])  # (n, 3, 2)
    return np.einsum("ndk,nk->nd", tangents, coeffs)


@dataclass
class EigenvectorErrorReport:
    """Per-level subspace-projection errors for estimated eigenfields."""

    levels: list[int]
    errors: list[float]
    cluster_sizes: list[int]

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))


def _cluster_window(eigenvalues, target, others, rel_gap):
    dist = min(abs(target - o) for o in others) if others else abs(target)
    half = rel_gap * dist
    mask = np.abs(eigenvalues - target) <= half
    return np.nonzero(mask)[0]


def eigenvector_error(
    eigenvalues: np.ndarray,
    eigenvectors: np.ndarray,
    frames: list[TangentFrame],
    cloud: PointCloud,
    operator: str,
    levels=(1, 2, 3),
    rel_gap: float = 0.25,
) -> EigenvectorErrorReport:
    """Least-squares field-recovery error against analytic sphere eigenfields.

    For each analytic level, estimated modes whose eigenvalue lies within
    rel_gap times the distance to the nearest other analytic level are
    lifted to ambient fields and used as a basis; every analytic
    eigenfield (normalized to unit discrete norm) is fit by least squares
    and the mean squared residual per point is recorded.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    n = len(frames)
    level_sets = sphere_eigenfield_levels(operator, levels)
    targets = [ls.eigenvalue for ls in level_sets]
    errors = []
    sizes = []
    for ls in level_sets:
        others = [t for t in targets if t != ls.eigenvalue]
        idx = _cluster_window(eigenvalues, ls.eigenvalue, others, rel_gap)
        if idx.size == 0:
            raise AmbiguousClusterError(
                f"no estimated eigenvalue within the level-{ls.level} window around "
                f"{ls.eigenvalue:.6g}; estimates near that range: "
                f"{np.sort(eigenvalues)[:12]}"
            )
        basis = np.column_stack(
            [lift_field(eigenvectors[:, j], frames).reshape(-1) for j in idx]
        )
        level_err = []
        for make_field in ls.fields:
            target_field = make_field(cloud.points)
            norm = np.linalg.norm(target_field)
            if norm == 0.0:
                raise ValueError("analytic eigenfield vanished on the sample")
            target_vec = (target_field / norm).reshape(-1)
            coef, *_ = np.linalg.lstsq(basis, target_vec, rcond=None)
            resid = target_vec - basis @ coef
            level_err.append(float(np.sum(resid ** 2) / n))
        errors.append(float(np.mean(level_err)))
        sizes.append(int(idx.size))
    return EigenvectorErrorReport(levels=[ls.level for ls in level_sets],
                                  errors=errors, cluster_sizes=sizes)


@dataclass
class ConvergenceReport:
    """Log-log fit of error versus sample size."""

    sample_sizes: np.ndarray
    mean_errors: np.ndarray
    stderr: np.ndarray
    rate: float
    rate_stderr: float
    intercept: float

    def as_dict(self) -> dict:
        return {
            "sample_sizes": [int(v) for v in self.sample_sizes],
            "mean_errors": [float(v) for v in self.mean_errors],
            "stderr": [float(v) for v in self.stderr],
            "rate": float(self.rate),
            "rate_stderr": float(self.rate_stderr),
            "intercept": float(self.intercept),
        }


def fit_convergence_rate(sample_sizes, errors_per_size) -> ConvergenceReport:
    """Fit log(error) = rate * log(N) + intercept over trial means.

    errors_per_size is a sequence of per-trial error lists, one list per
    sample size. The slope standard error comes from the fit covariance
    when three or more sizes are available.
    """
    sizes = np.asarray(sample_sizes, dtype=float)
    if sizes.size != len(errors_per_size):
        raise ValueError("one error list per sample size is required")
    if sizes.size < 2:
        raise ValueError("need at least two sample sizes to fit a rate")
    means = np.array([np.mean(e) for e in errors_per_size])
    stderr = np.array([
        np.std(e, ddof=1) / np.sqrt(len(e)) if len(e) > 1 else 0.0
        for e in errors_per_size
    ])
    if np.any(means <= 0.0):
        raise ValueError("errors must be positive for a log-log fit")
    logn = np.log(sizes)
    loge = np.log(means)
    if sizes.size >= 3:
        coeffs, cov = np.polyfit(logn, loge, 1, cov=True)
        rate_stderr = float(np.sqrt(cov[0, 0]))
    else:
        coeffs = np.polyfit(logn, loge, 1)
        rate_stderr = float("nan")
    return ConvergenceReport(
        sample_sizes=np.asarray(sample_sizes, dtype=int),
        mean_errors=means,
        stderr=stderr,
        rate=float(coeffs[0]),
        rate_stderr=rate_stderr,
        intercept=float(coeffs[1]),
    )


def leading_cluster_means(
    eigenvalues: np.ndarray,
    n_clusters: int,
    theta: float = 0.5,
    floor_frac: float = 1e-3,
):
    """Means and sizes of the first n_clusters gap-separated clusters."""
    clusters = cluster_by_gap(eigenvalues, theta=theta, floor_frac=floor_frac)
    if len(clusters) < n_clusters:
        raise AmbiguousClusterError(
            f"found only {len(clusters)} clusters, needed {n_clusters}; "
            f"eigenvalues: {np.sort(np.asarray(eigenvalues))[:20]}"
        )
    values = np.asarray(eigenvalues, dtype=float)
    means = [float(values[c].mean()) for c in clusters[:n_clusters]]
    sizes = [int(c.size) for c in clusters[:n_clusters]]
    return means, sizes
