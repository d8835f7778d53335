"""Reference spectra and eigenfields the estimates are benchmarked against.

Unit sphere (closed forms):
  Laplace-Beltrami   l(l+1),      multiplicity 2l+1, l >= 0
  Hodge 1-Laplacian  l(l+1),      multiplicity 2(2l+1), l >= 1; no kernel
  Bochner Laplacian  l(l+1) - 1,  multiplicity 2(2l+1), l >= 1
Eigenfields for levels 1..3 are n x grad f and (I - n n^T) grad f over the
degree-l harmonic polynomials f restricted to the sphere.

Torus ((2+cos th) cos ph, (2+cos th) sin ph, sin th): no closed forms, so the
Laplace-Beltrami spectrum comes from a per-Fourier-mode ODE eigenproblem in
self-adjoint form, -(w Th')' + (m^2/w) Th = lambda w Th with w = 2 + cos th,
discretized by second-order conservative central differences on a periodic
grid and Richardson-extrapolated across a grid doubling (the raw scheme is
O(h^2); extrapolation makes the oracle's self-consistency check meaningful
at the 1e-6 level). Each m > 0 contributes its eigenvalues twice (e^{imph}
and e^{-imph}). The Hodge spectrum on the torus is the nontrivial
Laplace-Beltrami spectrum with doubled multiplicities plus a two-dimensional
kernel (the harmonic 1-forms).
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .errors import OracleUnconvergedError, UnsupportedLevelError

OPERATORS = ("laplace_beltrami", "bochner", "hodge")


@dataclass
class AnalyticSpectrum:
    operator: str
    entries: list          # [(eigenvalue, multiplicity)] ascending
    source: str            # "closed-form" or "fd"

    def expand(self, n_modes: int) -> np.ndarray:
        """First n_modes eigenvalues counted with multiplicity."""
        out = []
        for lam, mult in self.entries:
            out.extend([lam] * mult)
            if len(out) >= n_modes:
                break
        if len(out) < n_modes:
            raise ValueError(f"spectrum holds {len(out)} modes < requested {n_modes}")
        return np.array(out[:n_modes])

    def nontrivial(self, zero_tol: float = 1e-8) -> "AnalyticSpectrum":
        kept = [(lam, mult) for lam, mult in self.entries if lam > zero_tol]
        return AnalyticSpectrum(self.operator, kept, self.source)

    def n_zero_modes(self, zero_tol: float = 1e-8) -> int:
        return sum(mult for lam, mult in self.entries if lam <= zero_tol)


@dataclass
class AnalyticEigenfieldSet:
    level: int
    eigenvalue: float
    fields: list           # callables (m, 3) points -> (m, 3) tangent fields


def sphere_spectrum(operator: str, n_levels: int = 8) -> AnalyticSpectrum:
    if operator == "laplace_beltrami":
        entries = [(float(l * (l + 1)), 2 * l + 1) for l in range(n_levels + 1)]
    elif operator == "hodge":
        entries = [(float(l * (l + 1)), 2 * (2 * l + 1)) for l in range(1, n_levels + 1)]
    elif operator == "bochner":
        entries = [(float(l * (l + 1) - 1), 2 * (2 * l + 1)) for l in range(1, n_levels + 1)]
    else:
        raise ValueError(f"unknown operator {operator!r}")
    return AnalyticSpectrum(operator, entries, "closed-form")


def _harmonic_gradients(level: int):
    """(f, grad f) callables for the degree-level harmonic family."""
    eye = np.eye(3)
    if level == 1:
        return [(lambda x, i=i: x[:, i],
                 lambda x, i=i: np.broadcast_to(eye[i], x.shape).copy())
                for i in range(3)]
    if level == 2:
        out = []
        for i, k in combinations_with_replacement(range(3), 2):
            out.append((
                lambda x, i=i, k=k: 3.0 * x[:, i] * x[:, k] - eye[i, k],
                lambda x, i=i, k=k: 3.0 * (eye[i][None, :] * x[:, k, None]
                                           + x[:, i, None] * eye[k][None, :]),
            ))
        return out
    if level == 3:
        out = []
        for i, j, k in combinations_with_replacement(range(3), 3):
            def f(x, i=i, j=j, k=k):
                return (15.0 * x[:, i] * x[:, j] * x[:, k]
                        - 3.0 * (eye[i, j] * x[:, k] + eye[k, i] * x[:, j]
                                 + eye[j, k] * x[:, i]))

            def grad(x, i=i, j=j, k=k):
                g = 15.0 * (eye[i][None, :] * (x[:, j] * x[:, k])[:, None]
                            + eye[j][None, :] * (x[:, i] * x[:, k])[:, None]
                            + eye[k][None, :] * (x[:, i] * x[:, j])[:, None])
                g -= 3.0 * (eye[i, j] * eye[k][None, :] + eye[k, i] * eye[j][None, :]
                            + eye[j, k] * eye[i][None, :])
                return g

            out.append((f, grad))
        return out
    raise UnsupportedLevelError(f"eigenfields tabulated for levels 1-3, got {level}")


def _rotational_field(grad):
    def field(x):
        n = x / np.linalg.norm(x, axis=1, keepdims=True)
        return np.cross(n, grad(x))
    return field


def _gradient_field(grad):
    def field(x):
        n = x / np.linalg.norm(x, axis=1, keepdims=True)
        g = grad(x)
        return g - (np.einsum("mi,mi->m", g, n))[:, None] * n
    return field


def sphere_eigenfields(level: int, operator: str = "hodge") -> AnalyticEigenfieldSet:
    """Tangent eigenfields of the sphere vector Laplacians at one level.

    Both families share eigenfields; only the eigenvalue changes. The
    returned field list spans the 2(2l+1)-dimensional eigenspace but is not
    linearly independent for level >= 2 (the harmonic family is traced).
    """
    if operator == "hodge":
        lam = float(level * (level + 1))
    elif operator == "bochner":
        lam = float(level * (level + 1) - 1)
    else:
        raise ValueError(f"eigenfields defined for vector operators, got {operator!r}")
    rot, grd = [], []
    for _, grad in _harmonic_gradients(level):
        rot.append(_rotational_field(grad))
        grd.append(_gradient_field(grad))
    return AnalyticEigenfieldSet(level, lam, rot + grd)


def sphere_eigenfield_levels(operator: str, levels=(1, 2, 3)) -> list:
    return [sphere_eigenfields(l, operator) for l in levels]


def _torus_branch(n_grid: int, m: int, k: int) -> np.ndarray:
    """Smallest k eigenvalues of the periodic theta-ODE for Fourier index m."""
    h = 2.0 * np.pi / n_grid
    theta = h * np.arange(n_grid)
    w = 2.0 + np.cos(theta)
    w_plus = 2.0 + np.cos(theta + 0.5 * h)    # w at j+1/2
    w_minus = np.roll(w_plus, 1)              # w at j-1/2
    main = (w_plus + w_minus) / h**2 + (m * m) / w
    A = sparse.diags([main, -w_plus[:-1] / h**2, -w_plus[:-1] / h**2],
                     [0, 1, -1], format="lil")
    A[0, -1] = -w_plus[-1] / h**2
    A[-1, 0] = -w_plus[-1] / h**2
    A = A.tocsc()
    W = sparse.diags(w).tocsc()
    v0 = np.cos(theta) + 0.5
    vals = eigsh(A, k=k, M=W, sigma=-0.1, which="LM", v0=v0,
                 return_eigenvectors=False)
    return np.sort(vals)


@lru_cache(maxsize=32)
def _torus_lb_entries(n_modes: int, n_grid: int, m_max: int, check_tol: float):
    if n_grid % 4 != 0 or n_grid < 64:
        raise ValueError("n_grid must be a multiple of 4 and at least 64")
    k = min(n_modes + 4, n_grid // 8)
    merged = []  # (lambda_extrapolated, multiplicity, refinement drift)
    for m in range(m_max + 1):
        mult = 1 if m == 0 else 2
        # Richardson pairs are matched within the branch, where the
        # eigenvalue ordering is stable across grids.
        v1 = _torus_branch(n_grid, m, k)
        v2 = _torus_branch(n_grid // 2, m, k)
        v3 = _torus_branch(n_grid // 4, m, k)
        fine = (4.0 * v1 - v2) / 3.0    # lam(h) = lam + C h^2
        coarse = (4.0 * v2 - v3) / 3.0
        drift = np.abs(fine - coarse) / np.maximum(np.abs(fine), 1.0)
        merged.extend(zip(fine.tolist(), [mult] * k, drift.tolist()))
    merged.sort(key=lambda t: t[0])
    out = []
    count = 0
    for lam, mult, drift in merged:
        out.append((lam, mult, drift))
        count += mult
        if count >= n_modes + 2:
            break
    if count < n_modes:
        raise ValueError("m_max too small for the requested number of modes")
    ncheck = min(10, len(out))
    worst = max(t[2] for t in out[:ncheck])
    if worst > check_tol:
        raise OracleUnconvergedError(
            f"torus FD oracle drift {worst:.2e} exceeds {check_tol:.1e}; "
            f"refine n_grid (currently {n_grid})"
        )
    return tuple((float(lam), int(mult)) for lam, mult, _ in out)


def torus_lb_spectrum_fd(n_modes: int = 12, n_grid: int = 1024, m_max: int = 64,
                         check_tol: float = 1e-6) -> AnalyticSpectrum:
    """Semi-analytic torus Laplace-Beltrami spectrum (Richardson-extrapolated FD)."""
    entries = list(_torus_lb_entries(n_modes, n_grid, m_max, check_tol))
    return AnalyticSpectrum("laplace_beltrami", entries, "fd")


def torus_hodge_spectrum_fd(n_modes: int = 12, n_grid: int = 1024, m_max: int = 64,
                            check_tol: float = 1e-6) -> AnalyticSpectrum:
    """Torus Hodge spectrum: doubled nontrivial LB spectrum plus dim-2 kernel."""
    # request enough scalar modes that doubling still covers n_modes
    lb = torus_lb_spectrum_fd(max(n_modes, 4), n_grid, m_max, check_tol)
    entries = [(0.0, 2)]
    for lam, mult in lb.entries:
        if lam > 1e-8:
            entries.append((lam, 2 * mult))
    return AnalyticSpectrum("hodge", entries, "fd")
