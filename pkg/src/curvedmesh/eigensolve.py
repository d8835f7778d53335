"""Smallest eigenpairs of the symmetric-definite pencil A w = lambda B w.

Production path: ARPACK (implicitly restarted Lanczos) in shift-invert mode
through scipy's eigsh, with a deterministic start vector so identical inputs
give identical output. The default shift sits half a first-eigenvalue scale
below zero: by Weyl asymptotics on a 2-manifold the mean generalized
eigenvalue is ~ c * dim, so trace(A)/trace(B)/dim estimates the scale of the
smallest nontrivial eigenvalue. Small problems fall back to a dense solve.

Also provides pencil diagnostics: extreme eigenvalue estimates of A and B
and the induced Crawford-number lower bound min(x'Ax)^2 + (x'Bx)^2 >=
max(a_min,0)^2 + max(b_min,0)^2, which governs how perturbations of (A, B)
move the spectrum.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from .errors import EigenConvergenceError, IndefiniteMassError

DENSE_CUTOFF = 260
_V0_SEED = 987654321


@dataclass
class EigenResult:
    eigenvalues: np.ndarray    # (L,) ascending
    eigenvectors: np.ndarray   # (dim, L), B-orthonormal columns
    residuals: np.ndarray      # (L,) ||A w - lambda B w|| / ||B w||
    sigma: float
    method: str                # "shift-invert-lanczos" or "dense"
    converged: bool = True


@dataclass
class PencilDiagnostics:
    a_min_eig: float
    b_min_eig: float
    crawford_lower_bound: float
    mass_near_singular: bool


def default_shift(A: sparse.spmatrix, B: sparse.spmatrix) -> float:
    """-0.5 times the Weyl-scale estimate of the first eigenvalue."""
    tra = float(A.diagonal().sum())
    trb = float(B.diagonal().sum())
    dim = A.shape[0]
    if trb <= 0 or not np.isfinite(tra / trb):
        return -1.0
    scale = tra / trb / dim
    return -0.5 * max(scale, 1e-12)


def _check_mass_spd(B: sparse.spmatrix):
    """Positive definiteness through a pivot-free factorization (Cholesky-like)."""
    dim = B.shape[0]
    if dim <= 400:
        try:
            np.linalg.cholesky(np.asarray(B.todense()))
            return
        except np.linalg.LinAlgError as exc:
            raise IndefiniteMassError(f"mass matrix is not positive definite: {exc}") from exc
    try:
        lu = splu(B.tocsc(), diag_pivot_thresh=0.0,
                  permc_spec="MMD_AT_PLUS_A", options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise IndefiniteMassError(f"mass matrix factorization failed: {exc}") from exc
    if np.any(lu.U.diagonal() <= 0):
        raise IndefiniteMassError("mass matrix has a nonpositive pivot")


def _residuals(A, B, vals, vecs):
    av = A @ vecs
    bv = B @ vecs
    num = np.linalg.norm(av - bv * vals[None, :], axis=0)
    den = np.linalg.norm(bv, axis=0)
    den[den == 0] = 1.0
    return num / den


def _b_orthonormalize(B, vals, vecs, defect_tol=1e-8):
    gram = vecs.T @ (B @ vecs)
    defect = np.linalg.norm(gram - np.eye(gram.shape[0]))
    if defect > defect_tol:
        L = np.linalg.cholesky(gram)
        vecs = np.linalg.solve(L, vecs.T).T
    return vecs


def solve_smallest(A: sparse.spmatrix, B: sparse.spmatrix, n_modes: int, *,
                   tol: float = 1e-8, sigma: float | None = None,
                   maxiter: int = 500, check_mass: bool = True,
                   dense_cutoff: int = DENSE_CUTOFF) -> EigenResult:
    """The n_modes smallest eigenpairs of A w = lambda B w (A sym, B SPD)."""
    A = A.tocsr()
    B = B.tocsr()
    dim = A.shape[0]
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValueError("A and B must be square and conformable")
    if not 1 <= n_modes <= dim:
        raise ValueError(f"n_modes={n_modes} out of range for dim={dim}")
    asym = abs(A - A.T)
    bsym = abs(B - B.T)
    scale = max(abs(A).max(), 1e-300)
    if (asym.max() if asym.nnz else 0.0) > 1e-10 * scale:
        raise ValueError("A is not symmetric")
    if (bsym.max() if bsym.nnz else 0.0) > 1e-10 * max(abs(B).max(), 1e-300):
        raise ValueError("B is not symmetric")
    if check_mass:
        _check_mass_spd(B)
    if sigma is None:
        sigma = default_shift(A, B)
    if dim <= dense_cutoff or n_modes >= dim - 1:
        vals, vecs = scipy.linalg.eigh(np.asarray(A.todense()), np.asarray(B.todense()))
        vals, vecs = vals[:n_modes], vecs[:, :n_modes]
        res = _residuals(A, B, vals, vecs)
        return EigenResult(vals, vecs, res, float(sigma), "dense")

    rng = np.random.default_rng(_V0_SEED)
    v0 = rng.standard_normal(dim)
    ncv = int(min(dim - 1, max(2 * n_modes + 1, n_modes + 20)))
    arpack_tol = tol
    vals = vecs = None
    for attempt in range(2):
        try:
            vals, vecs = eigsh(A, k=n_modes, M=B, sigma=sigma, which="LM",
                               tol=arpack_tol, maxiter=maxiter, ncv=ncv, v0=v0)
        except ArpackNoConvergence as exc:
            got = exc.eigenvalues
            raise EigenConvergenceError(
                f"eigensolver converged {len(got)}/{n_modes} modes within {maxiter} iterations",
                eigenvalues=got,
                residuals=None,
            ) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        vecs = _b_orthonormalize(B, vals, vecs)
        res = _residuals(A, B, vals, vecs)
        if np.all(res <= tol * np.maximum(1.0, np.abs(vals))):
            return EigenResult(vals, vecs, res, float(sigma), "shift-invert-lanczos")
        arpack_tol = tol * 1e-3  # one stricter retry before reporting failure
    raise EigenConvergenceError(
        f"residuals up to {res.max():.3e} exceed tolerance {tol:.1e}",
        eigenvalues=vals,
        residuals=res,
    )


def _extreme_min_eig(X: sparse.spmatrix, tol: float) -> float:
    dim = X.shape[0]
    if dim <= 400:
        return float(np.linalg.eigvalsh(np.asarray(X.todense()))[0])
    eps = 1e-3 * max(abs(float(X.diagonal().sum())) / dim, 1e-12)
    v0 = np.random.default_rng(_V0_SEED).standard_normal(dim)
    try:
        vals = eigsh(X.tocsc(), k=1, sigma=-eps, which="LM", tol=tol,
                     maxiter=5000, v0=v0, return_eigenvectors=False)
        return float(vals[0])
    except (RuntimeError, ArpackNoConvergence):
        vals = eigsh(X, k=1, which="SA", tol=max(tol, 1e-4), maxiter=10000,
                     v0=v0, return_eigenvectors=False)
        return float(vals[0])


def pencil_diagnostics(A: sparse.spmatrix, B: sparse.spmatrix, *,
                       tol: float = 1e-6,
                       singular_ratio: float = 1e-10) -> PencilDiagnostics:
    """Extreme-eigenvalue pencil health check.

    mass_near_singular flags b_min below singular_ratio times the largest
    B entry, the regime where the generalized problem loses its conditioning.
    """
    a_min = _extreme_min_eig(A.tocsr(), tol)
    b_min = _extreme_min_eig(B.tocsr(), tol)
    crawford = max(a_min, 0.0) ** 2 + max(b_min, 0.0) ** 2
    b_scale = max(float(abs(B).max()), 1e-300)
    return PencilDiagnostics(
        a_min_eig=a_min,
        b_min_eig=b_min,
        crawford_lower_bound=crawford,
        mass_near_singular=bool(b_min <= singular_ratio * b_scale),
    )
