"""Independent reference implementations used to check the library.

Everything here is deliberately written the slow, obvious way (exhaustive
scans, textbook formulas, finite differences, dense factorizations) and
shares no code with the package under test.
"""

import numpy as np
import scipy.linalg


def brute_force_knn(points: np.ndarray, base: int, k: int) -> np.ndarray:
    """Indices of the k nearest points to points[base] by (distance, index)."""
    d = np.linalg.norm(points - points[base], axis=1)
    order = np.lexsort((np.arange(len(points)), d))
    return order[:k]


def circumcircle(p0, p1, p2):
    """Center and squared radius of the circle through three 2D points."""
    ax, ay = p0
    bx, by = p1
    cx, cy = p2
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-300:
        return None, None
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / d
    center = np.array([ux, uy])
    return center, float(np.sum((p0 - center) ** 2))


def brute_force_first_ring(points2d: np.ndarray, rel_tol: float = 1e-9) -> set:
    """Delaunay triangles incident to vertex 0 by the empty-circumcircle test.

    Checks every triple containing 0 against every other point; a triangle
    belongs to the Delaunay triangulation iff no point lies strictly inside
    its circumcircle. Returns the set of frozenset neighbor pairs {a, b}.
    O(k^4); only usable for the small local neighborhoods it is meant for.
    """
    n = len(points2d)
    scale2 = float(np.max(np.sum(points2d**2, axis=1)))
    ring = set()
    for a in range(1, n):
        for b in range(a + 1, n):
            tri = (points2d[0], points2d[a], points2d[b])
            area2 = abs((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
                        - (tri[1][1] - tri[0][1]) * (tri[2][0] - tri[0][0]))
            if area2 < 1e-12 * scale2:
                continue
            center, r2 = circumcircle(*tri)
            if center is None:
                continue
            empty = True
            for c in range(n):
                if c in (0, a, b):
                    continue
                if np.sum((points2d[c] - center) ** 2) < r2 * (1.0 - rel_tol):
                    empty = False
                    break
            if empty:
                ring.add(frozenset((a, b)))
    return ring


def fd_geometry(embedding, u: np.ndarray, h: float = 1e-6, h2: float = 1e-4) -> dict:
    """Metric quantities of a chart by central finite differences.

    embedding maps a 2-vector u to a point in R^m. Returns the metric, its
    coordinate derivatives, sqrt(det g) and its derivatives, and Christoffel
    symbols Gamma^q_{st} = 1/2 g^{qm} (d_s g_{mt} + d_t g_{ms} - d_m g_{st}).
    The metric itself uses step h; its derivatives use the larger step h2 so
    the inner-difference rounding noise is not amplified by the outer 1/(2 h2).
    """
    u = np.asarray(u, dtype=np.float64)

    def jac(v):
        cols = []
        for s in range(2):
            dv = np.zeros(2)
            dv[s] = h
            cols.append((embedding(v + dv) - embedding(v - dv)) / (2.0 * h))
        return np.column_stack(cols)

    def metric(v):
        J = jac(v)
        return J.T @ J

    g = metric(u)
    dg = np.empty((2, 2, 2))  # dg[s] = d g / d u_s
    dsqrt = np.empty(2)
    for s in range(2):
        dv = np.zeros(2)
        dv[s] = h2
        gp = metric(u + dv)
        gm = metric(u - dv)
        dg[s] = (gp - gm) / (2.0 * h2)
        dsqrt[s] = (np.sqrt(np.linalg.det(gp)) - np.sqrt(np.linalg.det(gm))) / (2.0 * h2)
    ginv = np.linalg.inv(g)
    gamma = np.empty((2, 2, 2))  # gamma[q, s, t]
    for q in range(2):
        for s in range(2):
            for t in range(2):
                acc = 0.0
                for m in range(2):
                    acc += 0.5 * ginv[q, m] * (dg[s][m, t] + dg[t][m, s] - dg[m][s, t])
                gamma[q, s, t] = acc
    return {
        "metric": g,
        "dmetric": dg,
        "sqrt_det": float(np.sqrt(np.linalg.det(g))),
        "dsqrt_det": dsqrt,
        "christoffel": gamma,
    }


def dense_generalized_eigh(A: np.ndarray, B: np.ndarray):
    """Full spectrum of A w = lambda B w through an explicit Cholesky reduction."""
    L = np.linalg.cholesky(B)
    Linv = scipy.linalg.solve_triangular(L, np.eye(len(B)), lower=True)
    C = Linv @ A @ Linv.T
    C = 0.5 * (C + C.T)
    vals, Q = np.linalg.eigh(C)
    vecs = Linv.T @ Q
    return vals, vecs


def spherical_harmonic_laplacian(f, theta: float, phi: float, h: float = 1e-4) -> float:
    """Positive Laplace-Beltrami operator of f(x, y, z) on the unit sphere.

    Central finite differences of the spherical-coordinate formula
    -Delta f = -(1/sin th) d_th(sin th d_th f) - (1/sin^2 th) d_phph f
    evaluated away from the poles.
    """

    def fs(th, ph):
        x = np.array([[np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]])
        return float(f(x)[0])

    d_th = (fs(theta + h, phi) - fs(theta - h, phi)) / (2.0 * h)
    d_thth = (fs(theta + h, phi) - 2.0 * fs(theta, phi) + fs(theta - h, phi)) / h**2
    d_phph = (fs(theta, phi + h) - 2.0 * fs(theta, phi) + fs(theta, phi - h)) / h**2
    lap = d_thth + (np.cos(theta) / np.sin(theta)) * d_th + d_phph / np.sin(theta) ** 2
    return -lap


def bochner_trace_inner_product(a: np.ndarray, g: np.ndarray, b: np.ndarray) -> float:
    """Index-sum form of the metric inner product of two (1,1) gradients:
    sum_{i j k l} a_{ij} g_{ik} b_{kl} g_{jl}."""
    acc = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    acc += a[i, j] * g[i, k] * b[k, l] * g[j, l]
    return acc


def structured_grid_mesh(nx: int, ny: int):
    """Unit-square grid points and the all-same-diagonal right triangulation.

    Returns (points2d, triangles) with points at integer coordinates and
    each cell split by the diagonal from (i, j) to (i+1, j+1).
    """
    pts = np.array([[i, j] for j in range(ny) for i in range(nx)], dtype=float)

    def vid(i, j):
        return j * nx + i

    tris = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return pts, tris


def cotangent_stiffness(points2d: np.ndarray, triangles) -> np.ndarray:
    """Dense cotangent-formula stiffness matrix of a 2D triangle mesh."""
    n = len(points2d)
    S = np.zeros((n, n))
    for (a, b, c) in triangles:
        idx = (a, b, c)
        P = points2d[list(idx)]
        for loc in range(3):
            i, j, k = idx[loc], idx[(loc + 1) % 3], idx[(loc + 2) % 3]
            # cotangent at vertex k of the angle opposite edge (i, j)
            e1 = points2d[i] - points2d[k]
            e2 = points2d[j] - points2d[k]
            cross = e1[0] * e2[1] - e1[1] * e2[0]
            cot = float(e1 @ e2) / abs(cross)
            S[i, j] -= 0.5 * cot
            S[j, i] -= 0.5 * cot
            S[i, i] += 0.5 * cot
            S[j, j] += 0.5 * cot
        del P
    return S
