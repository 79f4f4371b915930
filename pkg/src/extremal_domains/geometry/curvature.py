"""Second fundamental form, curvature tensors and the mean curvature.

Conventions (used throughout the package):

* ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`` and
  ``R_abcd = g(R(e_a, e_b) e_c, e_d)``; on the unit sphere
  ``R_{0i0j} = -delta_ij``.
* index 0 is the inward unit normal ``N``, indices ``1..n`` the orthonormal
  boundary frame ``E_i`` of the Fermi chart.
* ``h_ij = g(nabla_{E_i} N, E_j)`` and ``H = -sum_i h_ii``; for the planar
  wall ``x0 = h(x1)`` this makes ``H = h''/(1+h'^2)^{3/2}``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .fermi import _orthonormal_frame
from .models import ManifoldModel, _christoffel, _lambdify_array

__all__ = ["CurvatureData", "curvature_data", "riemann_symbolic", "mean_curvature_symbolic"]


@dataclass(frozen=True)
class CurvatureData:
    """Curvature quantities at a boundary point, in the Fermi frame.

    Attributes
    ----------
    h : ndarray
        Second fundamental form ``h_ij``, shape ``(n, n)``.
    R0i0j, Rk0ij : ndarray
        Ambient components ``R(N,E_i,N,E_j)`` and ``R(E_k,N,E_i,E_j)``.
    Rtilde : ndarray
        Intrinsic curvature of the boundary, ``(n, n, n, n)``.
    H : float
        Mean curvature ``-tr h``.
    gradH, hessH : ndarray
        Gradient and covariant Hessian of ``H`` along the boundary.
    ricN : float
        ``Ric(N, N)``.
    """

    p: np.ndarray
    frame: np.ndarray
    h: np.ndarray
    R0i0j: np.ndarray
    Rk0ij: np.ndarray
    Rtilde: np.ndarray
    H: float
    gradH: np.ndarray
    hessH: np.ndarray
    ricN: float

    def is_nondegenerate_critical(self, grad_tol: float = 1e-8, threshold: float = 1e-6) -> bool:
        """Critical point of ``H`` with Hessian eigenvalues away from 0."""
        eig = np.linalg.eigvalsh(self.hessH)
        return bool(np.linalg.norm(self.gradH) <= grad_tol and np.min(np.abs(eig)) > threshold)

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else float(v)
        return out


def riemann_symbolic(G: sp.Matrix, coords):
    """``R[a][b][c][d] = g(R(d_a, d_b) d_c, d_d)`` for the metric ``G``."""
    m = len(coords)
    Gam = _christoffel(G, coords)
    # R^e_{c a b}: R(d_a, d_b) d_c = R^e_{cab} d_e
    Rup = [[[[sp.S(0)] * m for _ in range(m)] for _ in range(m)] for _ in range(m)]
    for e in range(m):
        for c in range(m):
            for a in range(m):
                for b in range(m):
                    val = sp.diff(Gam[e][b][c], coords[a]) - sp.diff(Gam[e][a][c], coords[b])
                    val += sum(Gam[e][a][f] * Gam[f][b][c] - Gam[e][b][f] * Gam[f][a][c] for f in range(m))
                    Rup[e][c][a][b] = val
    return [[[[sum(Rup[e][c][a][b] * G[e, d] for e in range(m)) for d in range(m)] for c in range(m)] for b in range(m)] for a in range(m)]


def _second_fundamental_symbolic(model: ManifoldModel):
    """Coordinate components ``h_ij = -g(N, nabla_{T_i} T_j)`` on the boundary."""
    zb = model.coords[1:]
    n, m = model.n, model.dim
    Z = model.embedding_symbolic
    T = Z.jacobian(zb)
    sub = {model.coords[0]: model.boundary}
    Gb = model.metric.subs(sub)
    Gam = [[[g.subs(sub) for g in row] for row in plane] for plane in model.christoffel_symbolic]
    N = model.normal_symbolic
    h = sp.zeros(n, n)
    for i in range(n):
        for j in range(n):
            acc = [sp.diff(T[a, j], zb[i]) + sum(Gam[a][b][c] * T[b, i] * T[c, j] for b in range(m) for c in range(m)) for a in range(m)]
            h[i, j] = -sum(N[a] * Gb[a, b] * acc[b] for a in range(m) for b in range(m))
    return h


def mean_curvature_symbolic(model: ManifoldModel) -> sp.Expr:
    """``H(z') = -gamma^{ij} h_ij`` as an expression in the boundary coordinates."""
    h = _second_fundamental_symbolic(model)
    gamma_inv = model.induced_metric_symbolic.inv()
    n = model.n
    return -sum(gamma_inv[i, j] * h[i, j] for i in range(n) for j in range(n))


@lru_cache(maxsize=32)
def _compiled(model: ManifoldModel):
    """Lambdified boundary curvature quantities of ``model`` (cached per model)."""
    zb = model.coords[1:]
    n, m = model.n, model.dim
    h = _second_fundamental_symbolic(model)
    H = mean_curvature_symbolic(model)
    out = {
        "h": _lambdify_array(zb, h, (n, n)),
        "dH": _lambdify_array(zb, [sp.diff(H, z) for z in zb], (n,)),
        "d2H": _lambdify_array(zb, [[sp.diff(H, a, b) for b in zb] for a in zb], (n, n)),
    }
    if not model.is_flat_euclidean:
        out["R"] = _lambdify_array(model.coords, riemann_symbolic(model.metric, model.coords), (m,) * 4)
    if n >= 2:
        out["Rg"] = _lambdify_array(zb, riemann_symbolic(model.induced_metric_symbolic, zb), (n,) * 4)
    return out


def curvature_data(model: ManifoldModel, p) -> CurvatureData:
    """Curvature data at the boundary point with tangential coordinates ``p``.

    Everything is differentiated symbolically and evaluated at ``p``; the
    gradient and Hessian of ``H`` come from exact differentiation of ``H(z')``.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    n, m = model.n, model.dim
    fns = _compiled(model)
    gamma = np.array(model.induced_metric_fn(*p))
    E = _orthonormal_frame(gamma)
    h = E.T @ fns["h"](*p) @ E

    dH = fns["dH"](*p)
    GamB = model.induced_christoffel_fn(*p)
    hess_coord = fns["d2H"](*p) - np.einsum("kij,k->ij", GamB, dH)
    gradH = E.T @ dH
    hessH = E.T @ hess_coord @ E
    H = -float(np.trace(h))

    # ambient curvature in the frame (N, E_1..E_n)
    Nvec = model.normal_fn(*p)
    Evec = model.embedding_jacobian_fn(*p) @ E
    F = np.column_stack([Nvec, Evec])
    if model.is_flat_euclidean:
        R = np.zeros((m,) * 4)
    else:
        R = np.einsum("abcd,ai,bj,ck,dl->ijkl", fns["R"](*model.boundary_point(p)), F, F, F, F)
    R0i0j = R[0, 1:, 0, 1:]
    Rk0ij = R[1:, 0, 1:, 1:]
    ricN = float(sum(R[i, 0, 0, i] for i in range(1, m)))
    if n >= 2:
        Rtilde = np.einsum("abcd,ai,bj,ck,dl->ijkl", fns["Rg"](*p), E, E, E, E)
    else:
        Rtilde = np.zeros((n,) * 4)
    return CurvatureData(p, E, h, R0i0j, Rk0ij, Rtilde, H, gradH, hessH, ricN)
