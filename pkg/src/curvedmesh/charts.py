"""Degree-2 moving-least-squares charts and the metric geometry they induce.

Each neighborhood gets a quadratic graph chart over its tangent plane,

    p(v1, v2) = a v1^2 + b v2^2 + c v1 v2 + d v1 + e v2 + f,

fit to the neighbors' normal components by weighted least squares (the base
point carries weight 1, every other neighbor 1/k). The chart map
alpha(v) = (v1, v2, p(v)) induces a metric g = I + grad p grad p^T; pulling a
ring triangle back to the reference simplex through Phi(u) = u1 v1 + u2 v2
gives the curved-triangle metric

    g(u) = G0 + gamma(u) gamma(u)^T,   G0 = Gram(v1, v2),
    gamma(u) = V^T grad p(V u) = Hhat u + bhat,

with V = [v1 v2], Hhat = V^T H V, bhat = V^T grad p(0) and H the constant
Hessian of p. Because p is quadratic, Christoffel symbols and metric
derivatives have the closed forms

    Gamma^q_{st} = (g^{-1} gamma)_q Hhat_{st},
    d_s g_{mt}   = Hhat_{ms} gamma_t + gamma_m Hhat_{ts},
    d_s sqrt(det g) = sqrt(det g) * (gamma^T g^{-1} Hhat[:, s]),

which assembly evaluates at quadrature points without finite differences.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedFitError, InsufficientNeighborsError
from .rings import RingTriangle
from .tangent import ProjectedNeighborhood, TangentFrame

COND_CAP = 1e12
N_MONOMIALS = 6  # a, b, c, d, e, f


@dataclass
class GmlsChart:
    """Quadratic chart at one base point; coeffs ordered (a, b, c, d, e, f)."""

    base: int
    coeffs: np.ndarray
    residual: float  # rms weighted fit residual
    cond: float      # condition number of the weighted design matrix

    @property
    def hessian(self) -> np.ndarray:
        a, b, c = self.coeffs[0], self.coeffs[1], self.coeffs[2]
        return np.array([[2.0 * a, c], [c, 2.0 * b]])

    @property
    def grad0(self) -> np.ndarray:
        return self.coeffs[3:5].copy()

    def value(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        v1, v2 = v[..., 0], v[..., 1]
        a, b, c, d, e, f = self.coeffs
        return a * v1**2 + b * v2**2 + c * v1 * v2 + d * v1 + e * v2 + f

    def gradient(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        v1, v2 = v[..., 0], v[..., 1]
        a, b, c, d, e = self.coeffs[:5]
        return np.stack([2.0 * a * v1 + c * v2 + d, 2.0 * b * v2 + c * v1 + e], axis=-1)


@dataclass
class ChartGeometry:
    """Pointwise metric data of a chart (or of a pulled-back ring triangle).

    basis rows are the pushforward basis vectors in chart coordinates
    (tangent1, tangent2, normal); christoffel[q, s, t] = Gamma^q_{st};
    dmetric[s] = d g / d u_s; dsqrt_det[s] = d sqrt(det g) / d u_s.
    """

    basis: np.ndarray
    metric: np.ndarray
    inv_metric: np.ndarray
    sqrt_det: float
    christoffel: np.ndarray
    dmetric: np.ndarray
    dsqrt_det: np.ndarray


def design_matrix(coords: np.ndarray) -> np.ndarray:
    """Rows [v1^2, v2^2, v1 v2, v1, v2, 1] matching the coefficient order."""
    v1, v2 = coords[:, 0], coords[:, 1]
    return np.column_stack([v1**2, v2**2, v1 * v2, v1, v2, np.ones_like(v1)])


def gmls_weights(k: int) -> np.ndarray:
    """Base point weight 1, everyone else 1/k."""
    w = np.full(k, 1.0 / k)
    w[0] = 1.0
    return w


def fit_chart(proj: ProjectedNeighborhood, cond_cap: float = COND_CAP) -> GmlsChart:
    """Weighted LS fit of the quadratic chart to the normal components.

    Solved through an SVD least-squares factorization of the sqrt-weighted
    design matrix; its condition number is checked against cond_cap.
    """
    k = proj.k
    if k < N_MONOMIALS:
        raise InsufficientNeighborsError(
            f"point {proj.base_index}: {k} neighbors < {N_MONOMIALS} chart unknowns"
        )
    A = design_matrix(proj.coords)
    sw = np.sqrt(gmls_weights(k))
    Aw = A * sw[:, None]
    yw = proj.normal_comps * sw
    coeffs, _, rank, svals = np.linalg.lstsq(Aw, yw, rcond=None)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else np.inf
    if rank < N_MONOMIALS or cond > cond_cap:
        raise IllConditionedFitError(
            f"point {proj.base_index}: design matrix condition {cond:.3e} exceeds {cond_cap:.1e}"
        )
    residual = float(np.sqrt(np.mean((Aw @ coeffs - yw) ** 2)))
    return GmlsChart(proj.base_index, coeffs, residual, cond)


def fit_charts(projs: list) -> list:
    return [fit_chart(p) for p in projs]


def _geometry_from(gamma: np.ndarray, G0: np.ndarray, Hhat: np.ndarray,
                   basis: np.ndarray) -> ChartGeometry:
    g = G0 + np.outer(gamma, gamma)
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    ginv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det
    sqrt_det = float(np.sqrt(det))
    gig = ginv @ gamma
    christoffel = np.einsum("q,st->qst", gig, Hhat)
    dmetric = np.empty((2, 2, 2))
    for s in range(2):
        dmetric[s] = np.outer(Hhat[:, s], gamma) + np.outer(gamma, Hhat[:, s])
    dsqrt_det = sqrt_det * (Hhat @ gig)  # component s = sqrt_det * gamma.ginv.Hhat[:,s]
    return ChartGeometry(basis, g, ginv, sqrt_det, christoffel, dmetric, dsqrt_det)


def graph_geometry(chart: GmlsChart, v: np.ndarray) -> ChartGeometry:
    """Metric data of the graph chart alpha(v) = (v1, v2, p(v)) at v."""
    v = np.asarray(v, dtype=np.float64)
    grad = chart.gradient(v)
    basis = np.array([[1.0, 0.0, grad[0]], [0.0, 1.0, grad[1]]])
    return _geometry_from(grad, np.eye(2), chart.hessian, basis)


def pullback_geometry(chart: GmlsChart, tri: RingTriangle, u: np.ndarray) -> ChartGeometry:
    """Metric data of the curved triangle Phi(u) = (u1 v1 + u2 v2, p(...)) at u."""
    u = np.asarray(u, dtype=np.float64)
    V = np.column_stack([tri.v1, tri.v2])
    G0 = V.T @ V
    Hhat = V.T @ chart.hessian @ V
    bhat = V.T @ chart.grad0
    gamma = Hhat @ u + bhat
    grad = chart.gradient(u[0] * tri.v1 + u[1] * tri.v2)
    basis = np.array([
        [tri.v1[0], tri.v1[1], grad @ tri.v1],
        [tri.v2[0], tri.v2[1], grad @ tri.v2],
    ])
    return _geometry_from(gamma, G0, Hhat, basis)


def frame_component_vector(frame_i: TangentFrame, frame_j: TangentFrame,
                           tri: RingTriangle, chart: GmlsChart, u: np.ndarray,
                           axis: int, mode: str = "reduced") -> tuple[np.ndarray, float]:
    """Coefficients a of frame axis t_axis^{(j)} in the pulled-back chart basis.

    Solves R a ~ T_i^T t_axis^{(j)} in least squares, where R stacks the
    pushforward basis vectors of the curved triangle (columns) expressed in
    the i-frame. mode="reduced" keeps only the tangential rows, making a
    independent of u; mode="full" keeps the normal row too. Returns
    (a, residual) with residual = ||R a - rhs|| for the rows used.
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    t = frame_j.basis[:, axis - 1]
    w = frame_i.basis.T @ t  # frame-i coordinates of the target axis
    V = np.column_stack([tri.v1, tri.v2])
    if mode == "reduced":
        a = np.linalg.solve(V, w[:2])
        return a, float(np.linalg.norm(V @ a - w[:2]))
    if mode == "full":
        u = np.asarray(u, dtype=np.float64)
        Hhat = V.T @ chart.hessian @ V
        bhat = V.T @ chart.grad0
        gamma = Hhat @ u + bhat
        R = np.vstack([V, gamma[None, :]])
        g = V.T @ V + np.outer(gamma, gamma)  # = R^T R
        rhs = R.T @ w
        a = np.linalg.solve(g, rhs)
        return a, float(np.linalg.norm(R @ a - w))
    raise ValueError(f"unknown mode {mode!r}")


def chart_inner_product(frame_i: TangentFrame, frame_j: TangentFrame,
                        tri: RingTriangle, chart: GmlsChart, u: np.ndarray,
                        axis_i: int, axis_j: int, mode: str = "reduced") -> float:
    """<t_{axis_i}^{(i)}, t_{axis_j}^{(j)}>_g at u via component vectors."""
    ai, _ = frame_component_vector(frame_i, frame_i, tri, chart, u, axis_i, mode)
    aj, _ = frame_component_vector(frame_i, frame_j, tri, chart, u, axis_j, mode)
    geo = pullback_geometry(chart, tri, np.asarray(u, dtype=np.float64))
    return float(ai @ geo.metric @ aj)
