"""Sparse weak-form assembly over local curved meshes.

Every point contributes one-sided element integrals over its own first ring:
the base hat function is 1 - u1 - u2 on each ring triangle, the neighbor hat
(for off-diagonal couplings) is u1 after the shared vertex is rotated to the
reference corner (1, 0). Each ring triangle is therefore enumerated twice,
once per non-base vertex; the "primary" copy also carries the diagonal
contribution.

Operators:
  laplace_beltrami  scalar hats, integrand grad e_i . g^{-1} grad e_j
  bochner           frame fields e_i t_k, integrand trace(grad_i g grad_j^T g)
  hodge             frame fields through the 1-form d/d* pairing

Raw one-sided assemblies S (stiffness) and M (mass) are symmetrized into the
pencil A = (S + S^T)/2, B = (M + M^T)/2; no diagonal adjustments are applied.
Stiffness integrals default to the 3-vertex rule (weights 1/6), mass
integrals to the 3-edge-midpoint rule (weights 1/6, exact through degree 2;
the vertex rule would annihilate the hat-product integrands).

Vector degrees of freedom interleave: point i owns rows/cols (2i, 2i+1) for
its two tangent axes, matching the eigenvector lift sum_k w[2i+k] t_k^(i).
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import TriangleBudgetError
from .sampling import PointCloud

DROP_BUDGET = 0.01
# an empty ring forfeits about one fan of triangles in the drop accounting
EMPTY_RING_TRIANGLE_COST = 6


@dataclass(frozen=True)
class TriangleRule:
    """Quadrature on the reference simplex {u1, u2 >= 0, u1 + u2 <= 1}."""

    name: str
    points: np.ndarray   # (q, 2)
    weights: np.ndarray  # (q,), summing to 1/2 (the simplex area)

    def integrate(self, fn) -> float:
        """Apply the rule to a scalar callable of u; for exactness tests."""
        return float(sum(w * fn(u) for u, w in zip(self.points, self.weights)))


def _rule(name, pts):
    return TriangleRule(name, np.array(pts, dtype=np.float64),
                        np.full(len(pts), 1.0 / 6.0))


VERTEX_RULE = _rule("vertex", [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
MIDPOINT_RULE = _rule("midpoint", [(0.5, 0.0), (0.0, 0.5), (0.5, 0.5)])
RULES = {"vertex": VERTEX_RULE, "midpoint": MIDPOINT_RULE}


def get_rule(rule) -> TriangleRule:
    if isinstance(rule, TriangleRule):
        return rule
    try:
        return RULES[rule]
    except KeyError:
        raise ValueError(f"unknown quadrature rule {rule!r}") from None


@dataclass
class AssemblyStats:
    n_points: int
    candidate_triangles: int
    dropped_triangles: int
    empty_rings: int
    dropped_fraction: float
    operator: str
    frame_mode: str
    metric_mode: str
    stiffness_rule: str
    mass_rule: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class OperatorPencil:
    """Raw one-sided assemblies plus the symmetrized (A, B) pencil."""

    operator: str
    dim: int
    stiffness_raw: sparse.csr_matrix
    mass_raw: sparse.csr_matrix
    stiffness: sparse.csr_matrix   # A = sym(S)
    mass: sparse.csr_matrix        # B = sym(M)
    stats: AssemblyStats = None


def symmetrize(x: sparse.spmatrix) -> sparse.csr_matrix:
    return ((x + x.T) * 0.5).tocsr()


def _inv2(g: np.ndarray) -> np.ndarray:
    """Batched explicit inverse of (m, 2, 2) matrices."""
    det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
    out = np.empty_like(g)
    out[:, 0, 0] = g[:, 1, 1]
    out[:, 0, 1] = -g[:, 0, 1]
    out[:, 1, 0] = -g[:, 1, 0]
    out[:, 1, 1] = g[:, 0, 0]
    out /= det[:, None, None]
    return out


# hat-gradient pattern matrices for the covariant gradient:
# row m of _E_BASE[m] is the euclidean gradient of the base hat (1-u1-u2),
# row m of _E_NBR[m] that of the neighbor hat u1.
_E_BASE = np.array([[[-1.0, -1.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, -1.0]]])
_E_NBR = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]])


class _Worklist:
    """Flattened oriented ring-triangle instances with vectorized geometry.

    Instance m has base point base[m], neighbor nbr[m] at reference corner
    (1,0) and third vertex oth[m]; v-coordinates columns of V[m]. primary[m]
    marks one orientation per physical triangle (carries the diagonal term).
    """

    def __init__(self, cloud: PointCloud, rings, charts, frames=None,
                 metric_mode: str = "curved"):
        base, nbr, oth, prim = [], [], [], []
        v1s, v2s = [], []
        cand = dropped = empty = 0
        for i, ring in enumerate(rings):
            if ring is None:
                empty += 1
                cand += EMPTY_RING_TRIANGLE_COST
                dropped += EMPTY_RING_TRIANGLE_COST
                continue
            cand += len(ring.triangles) + ring.n_dropped
            dropped += ring.n_dropped
            for t in ring.triangles:
                base.extend((i, i))
                nbr.extend((t.i1, t.i2))
                oth.extend((t.i2, t.i1))
                prim.extend((True, False))
                v1s.extend((t.v1, t.v2))
                v2s.extend((t.v2, t.v1))
        self.candidate_triangles = cand
        self.dropped_triangles = dropped
        self.empty_rings = empty
        if not base:
            raise TriangleBudgetError("no usable ring triangles at all")
        self.base = np.asarray(base, dtype=np.int64)
        self.nbr = np.asarray(nbr, dtype=np.int64)
        self.oth = np.asarray(oth, dtype=np.int64)
        self.primary = np.asarray(prim, dtype=bool)
        m = self.base.shape[0]
        V = np.empty((m, 2, 2))
        V[:, :, 0] = np.asarray(v1s)
        V[:, :, 1] = np.asarray(v2s)
        self.V = V
        if metric_mode == "curved":
            n = cloud.n_points
            hess = np.zeros((n, 2, 2))
            grad0 = np.zeros((n, 2))
            for i, ch in enumerate(charts):
                if ch is not None:
                    hess[i] = ch.hessian
                    grad0[i] = ch.grad0
            Hb = hess[self.base]
            self.G0 = np.einsum("mki,mkj->mij", V, V)
            self.Hhat = np.einsum("mki,mkl,mlj->mij", V, Hb, V)
            self.bhat = np.einsum("mki,mk->mi", V, grad0[self.base])
        elif metric_mode == "linear":
            pts = cloud.points
            e1 = pts[self.nbr] - pts[self.base]
            e2 = pts[self.oth] - pts[self.base]
            G0 = np.empty((m, 2, 2))
            G0[:, 0, 0] = np.einsum("mk,mk->m", e1, e1)
            G0[:, 0, 1] = G0[:, 1, 0] = np.einsum("mk,mk->m", e1, e2)
            G0[:, 1, 1] = np.einsum("mk,mk->m", e2, e2)
            self.G0 = G0
            self.Hhat = np.zeros((m, 2, 2))
            self.bhat = np.zeros((m, 2))
        else:
            raise ValueError(f"unknown metric mode {metric_mode!r}")
        det0 = V[:, 0, 0] * V[:, 1, 1] - V[:, 0, 1] * V[:, 1, 0]
        Vinv = np.empty_like(V)
        Vinv[:, 0, 0] = V[:, 1, 1]
        Vinv[:, 0, 1] = -V[:, 0, 1]
        Vinv[:, 1, 0] = -V[:, 1, 0]
        Vinv[:, 1, 1] = V[:, 0, 0]
        Vinv /= det0[:, None, None]
        self.Vinv = Vinv
        if frames is not None:
            Ttan = np.stack([f.tangent for f in frames])    # (n, 3, 2)
            Tnrm = np.stack([f.normal for f in frames])     # (n, 3)
            self.C = np.einsum("mda,mdb->mab", Ttan[self.base], Ttan[self.nbr])
            self.c3 = np.einsum("md,mdb->mb", Tnrm[self.base], Ttan[self.nbr])
            self.Aii_red = Vinv
            self.Aij_red = np.einsum("mij,mjk->mik", Vinv, self.C)
            # full mode: each hat's component vector is fit at that hat's own
            # vertex (base at u = (0,0), neighbor at u = (1,0)), so coefficients
            # stay constant over the element as the gradient formula requires
            Vt = V.transpose(0, 2, 1)
            g0inv = _inv2(self.G0 + self.bhat[:, :, None] * self.bhat[:, None, :])
            self.Aii_full = np.einsum("mij,mjk->mik", g0inv, Vt)
            gam1 = self.Hhat[:, :, 0] + self.bhat
            g1inv = _inv2(self.G0 + gam1[:, :, None] * gam1[:, None, :])
            rhs = (np.einsum("mij,mjk->mik", Vt, self.C)
                   + gam1[:, :, None] * self.c3[:, None, :])
            self.Aij_full = np.einsum("mij,mjk->mik", g1inv, rhs)

    def node_geometry(self, u: np.ndarray):
        gamma = np.einsum("mij,j->mi", self.Hhat, u) + self.bhat
        g = self.G0 + gamma[:, :, None] * gamma[:, None, :]
        det = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        sqrt_det = np.sqrt(det)
        ginv = np.empty_like(g)
        ginv[:, 0, 0] = g[:, 1, 1]
        ginv[:, 0, 1] = -g[:, 0, 1]
        ginv[:, 1, 0] = -g[:, 1, 0]
        ginv[:, 1, 1] = g[:, 0, 0]
        ginv /= det[:, None, None]
        gig = np.einsum("mij,mj->mi", ginv, gamma)
        return gamma, g, det, sqrt_det, ginv, gig

    def component_matrices(self, frame_mode):
        """a-vectors as columns: Aii[m, :, k] solves R a = frame axis k of base,
        Aij[m, :, k] the same for the neighbor's axis k."""
        if frame_mode == "reduced":
            return self.Aii_red, self.Aij_red
        if frame_mode == "full":
            return self.Aii_full, self.Aij_full
        raise ValueError(f"unknown frame mode {frame_mode!r}")


def _budget_check(wl: _Worklist, drop_budget: float):
    frac = wl.dropped_triangles / max(wl.candidate_triangles, 1)
    if frac > drop_budget:
        raise TriangleBudgetError(
            f"{wl.dropped_triangles}/{wl.candidate_triangles} candidate triangles "
            f"unusable ({frac:.2%} > {drop_budget:.2%} budget)"
        )
    return frac


def _stats(wl, cloud, operator, frame_mode, metric_mode, s_rule, m_rule, frac):
    return AssemblyStats(
        n_points=cloud.n_points,
        candidate_triangles=wl.candidate_triangles,
        dropped_triangles=wl.dropped_triangles,
        empty_rings=wl.empty_rings,
        dropped_fraction=frac,
        operator=operator,
        frame_mode=frame_mode,
        metric_mode=metric_mode,
        stiffness_rule=s_rule.name,
        mass_rule=m_rule.name,
    )


def assemble_laplace_beltrami(cloud: PointCloud, rings, charts, *,
                              metric_mode: str = "curved",
                              stiffness_rule="vertex", mass_rule="midpoint",
                              drop_budget: float = DROP_BUDGET) -> OperatorPencil:
    """Scalar Laplace-Beltrami pencil on hat functions (N x N)."""
    s_rule = get_rule(stiffness_rule)
    m_rule = get_rule(mass_rule)
    wl = _Worklist(cloud, rings, charts, metric_mode=metric_mode)
    frac = _budget_check(wl, drop_budget)
    m = wl.base.shape[0]
    s_di = np.zeros(m)
    s_of = np.zeros(m)
    for u, w in zip(s_rule.points, s_rule.weights):
        _, _, _, sqrt_det, ginv, _ = wl.node_geometry(u)
        # base hat gradient (-1,-1), neighbor hat gradient (1,0)
        s_di += w * ginv.sum(axis=(1, 2)) * sqrt_det
        s_of += w * (-(ginv[:, 0, 0] + ginv[:, 1, 0])) * sqrt_det
    m_di = np.zeros(m)
    m_of = np.zeros(m)
    for u, w in zip(m_rule.points, m_rule.weights):
        _, _, _, sqrt_det, _, _ = wl.node_geometry(u)
        phihat = 1.0 - u[0] - u[1]
        m_di += w * phihat * phihat * sqrt_det
        m_of += w * phihat * u[0] * sqrt_det
    n = cloud.n_points
    p = wl.primary
    rows = np.concatenate([wl.base[p], wl.base])
    cols = np.concatenate([wl.base[p], wl.nbr])
    S = sparse.coo_matrix((np.concatenate([s_di[p], s_of]), (rows, cols)),
                          shape=(n, n)).tocsr()
    M = sparse.coo_matrix((np.concatenate([m_di[p], m_of]), (rows, cols)),
                          shape=(n, n)).tocsr()
    stats = _stats(wl, cloud, "laplace_beltrami", "scalar", metric_mode,
                   s_rule, m_rule, frac)
    return OperatorPencil("laplace_beltrami", n, S, M, symmetrize(S), symmetrize(M), stats)


def _bochner_blocks(wl, u, gamma, g, det, sqrt_det, ginv, gig, Aii, Aij):
    phihat = 1.0 - u[0] - u[1]
    u1 = u[0]
    # Gm[i, m, q, s] = Gamma^q_{m s} = (g^{-1} gamma)_q Hhat_{m s}
    Gm = gig[:, None, :, None] * wl.Hhat[:, :, None, :]
    Gb = np.einsum("imqs,ist->imqt", phihat * Gm + _E_BASE[None], ginv)
    Gn = np.einsum("imqs,ist->imqt", u1 * Gm + _E_NBR[None], ginv)
    kbb = np.einsum("imab,ibc,indc,ida->imn", Gb, g, Gb, g)
    kbn = np.einsum("imab,ibc,indc,ida->imn", Gb, g, Gn, g)
    diag = np.einsum("imk,imn,inl->ikl", Aii, kbb, Aii) * sqrt_det[:, None, None]
    off = np.einsum("imk,imn,inl->ikl", Aii, kbn, Aij) * sqrt_det[:, None, None]
    return diag, off


def _hodge_blocks(wl, u, gamma, g, det, sqrt_det, ginv, gig, Aii, Aij):
    phihat = 1.0 - u[0] - u[1]
    u1 = u[0]
    Hh = wl.Hhat
    # metric derivative combinations entering the exterior derivative scalars
    d1g12 = Hh[:, 0, 0] * gamma[:, 1] + gamma[:, 0] * Hh[:, 1, 0]
    d2g11 = 2.0 * gamma[:, 0] * Hh[:, 0, 1]
    d1g22 = 2.0 * gamma[:, 1] * Hh[:, 1, 0]
    d2g12 = Hh[:, 0, 1] * gamma[:, 1] + gamma[:, 0] * Hh[:, 1, 1]
    sr = np.einsum("mst,mt->ms", Hh, gig)  # (1/sqrt det) d_s sqrt det
    # d(flat) and d*(flat) of hat * basis-vector, base hat then neighbor hat
    dvec_b = np.stack([g[:, 0, 0] - g[:, 0, 1] + phihat * (d1g12 - d2g11),
                       g[:, 0, 1] - g[:, 1, 1] + phihat * (d1g22 - d2g12)], axis=1)
    svec_b = np.stack([1.0 - phihat * sr[:, 0],
                       1.0 - phihat * sr[:, 1]], axis=1)
    dvec_n = np.stack([g[:, 0, 1] + u1 * (d1g12 - d2g11),
                       g[:, 1, 1] + u1 * (d1g22 - d2g12)], axis=1)
    svec_n = np.stack([-1.0 - u1 * sr[:, 0],
                       -u1 * sr[:, 1]], axis=1)
    dA = np.einsum("imk,im->ik", Aii, dvec_b)
    sA = np.einsum("imk,im->ik", Aii, svec_b)
    dB = np.einsum("imk,im->ik", Aij, dvec_n)
    sB = np.einsum("imk,im->ik", Aij, svec_n)
    w2 = (sqrt_det / det)[:, None, None]
    w0 = sqrt_det[:, None, None]
    diag = dA[:, :, None] * dA[:, None, :] * w2 + sA[:, :, None] * sA[:, None, :] * w0
    off = dA[:, :, None] * dB[:, None, :] * w2 + sA[:, :, None] * sB[:, None, :] * w0
    return diag, off


_VECTOR_BLOCKS = {"bochner": _bochner_blocks, "hodge": _hodge_blocks}


def _assemble_vector(operator, cloud, frames, rings, charts, *,
                     frame_mode, stiffness_rule, mass_rule, drop_budget):
    if operator not in _VECTOR_BLOCKS:
        raise ValueError(f"unknown vector operator {operator!r}")
    s_rule = get_rule(stiffness_rule)
    m_rule = get_rule(mass_rule)
    wl = _Worklist(cloud, rings, charts, frames=frames, metric_mode="curved")
    frac = _budget_check(wl, drop_budget)
    m = wl.base.shape[0]
    block_fn = _VECTOR_BLOCKS[operator]
    Aii, Aij = wl.component_matrices(frame_mode)
    s_di = np.zeros((m, 2, 2))
    s_of = np.zeros((m, 2, 2))
    for u, w in zip(s_rule.points, s_rule.weights):
        gamma, g, det, sqrt_det, ginv, gig = wl.node_geometry(u)
        diag, off = block_fn(wl, u, gamma, g, det, sqrt_det, ginv, gig, Aii, Aij)
        s_di += w * diag
        s_of += w * off
    m_di = np.zeros((m, 2, 2))
    m_of = np.zeros((m, 2, 2))
    for u, w in zip(m_rule.points, m_rule.weights):
        gamma, g, det, sqrt_det, ginv, gig = wl.node_geometry(u)
        phihat = 1.0 - u[0] - u[1]
        gii = np.einsum("msk,mst,mtl->mkl", Aii, g, Aii)
        gij = np.einsum("msk,mst,mtl->mkl", Aii, g, Aij)
        m_di += (w * phihat * phihat) * gii * sqrt_det[:, None, None]
        m_of += (w * phihat * u[0]) * gij * sqrt_det[:, None, None]
    n = cloud.n_points
    p = wl.primary
    k1 = np.array([0, 0, 1, 1])
    k2 = np.array([0, 1, 0, 1])

    def scatter(di, of):
        rows = np.concatenate([
            np.repeat(2 * wl.base[p], 4) + np.tile(k1, int(p.sum())),
            np.repeat(2 * wl.base, 4) + np.tile(k1, m),
        ])
        cols = np.concatenate([
            np.repeat(2 * wl.base[p], 4) + np.tile(k2, int(p.sum())),
            np.repeat(2 * wl.nbr, 4) + np.tile(k2, m),
        ])
        vals = np.concatenate([di[p].reshape(-1), of.reshape(-1)])
        return sparse.coo_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n)).tocsr()

    S = scatter(s_di, s_of)
    M = scatter(m_di, m_of)
    stats = _stats(wl, cloud, operator, frame_mode, "curved", s_rule, m_rule, frac)
    return OperatorPencil(operator, 2 * n, S, M, symmetrize(S), symmetrize(M), stats)


def assemble_vector_mass(cloud, frames, rings, charts, *, frame_mode="full",
                         mass_rule="midpoint", drop_budget=DROP_BUDGET) -> sparse.csr_matrix:
    """Raw (one-sided) vector mass matrix M, 2N x 2N."""
    return _assemble_vector("bochner", cloud, frames, rings, charts,
                            frame_mode=frame_mode, stiffness_rule="vertex",
                            mass_rule=mass_rule, drop_budget=drop_budget).mass_raw


def assemble_bochner_stiffness(cloud, frames, rings, charts, *, frame_mode="full",
                               stiffness_rule="vertex", drop_budget=DROP_BUDGET) -> sparse.csr_matrix:
    """Raw (one-sided) Bochner stiffness matrix S, 2N x 2N."""
    return _assemble_vector("bochner", cloud, frames, rings, charts,
                            frame_mode=frame_mode, stiffness_rule=stiffness_rule,
                            mass_rule="midpoint", drop_budget=drop_budget).stiffness_raw


def assemble_hodge_stiffness(cloud, frames, rings, charts, *, frame_mode="full",
                             stiffness_rule="vertex", drop_budget=DROP_BUDGET) -> sparse.csr_matrix:
    """Raw (one-sided) Hodge 1-Laplacian stiffness matrix S, 2N x 2N."""
    return _assemble_vector("hodge", cloud, frames, rings, charts,
                            frame_mode=frame_mode, stiffness_rule=stiffness_rule,
                            mass_rule="midpoint", drop_budget=drop_budget).stiffness_raw


def assemble_pencil(operator: str, cloud, frames, rings, charts, *,
                    frame_mode: str = "full", metric_mode: str = "curved",
                    stiffness_rule="vertex", mass_rule="midpoint",
                    drop_budget: float = DROP_BUDGET) -> OperatorPencil:
    """Assemble the full (A, B) pencil for any supported operator."""
    if operator == "laplace_beltrami":
        return assemble_laplace_beltrami(cloud, rings, charts,
                                         metric_mode=metric_mode,
                                         stiffness_rule=stiffness_rule,
                                         mass_rule=mass_rule,
                                         drop_budget=drop_budget)
    return _assemble_vector(operator, cloud, frames, rings, charts,
                            frame_mode=frame_mode, stiffness_rule=stiffness_rule,
                            mass_rule=mass_rule, drop_budget=drop_budget)
