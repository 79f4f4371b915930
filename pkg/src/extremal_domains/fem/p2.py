"""Quadratic Lagrange elements on straight triangles, with a metric.

For a metric ``g`` the bilinear forms are

    a(u, v) = int g^{ij} d_i u d_j v sqrt|g| dy,   m(u, v) = int u v sqrt|g| dy,

assembled with a degree-5 quadrature rule.  Degrees of freedom are the mesh
vertices followed by the edge midpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .mesh import DIRICHLET, SimplicialMesh

__all__ = ["P2Space", "assemble", "boundary_mass", "volume"]

# 7-point degree-5 rule on the reference triangle (barycentric, weights sum 1/2)
_A1, _B1 = 0.0597158717897698, 0.4701420641051151
_A2, _B2 = 0.7974269853530873, 0.1012865073234563
_TRI_PTS = np.array(
    [
        [1 / 3, 1 / 3],
        [_B1, _B1],
        [_A1, _B1],
        [_B1, _A1],
        [_B2, _B2],
        [_A2, _B2],
        [_B2, _A2],
    ]
)
_TRI_W = 0.5 * np.array([0.225] + [0.1323941527885062] * 3 + [0.1259391805448271] * 3)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
EDGE_T = 0.5 * (_GL_X + 1.0)
EDGE_W = 0.5 * _GL_W


def _shape(xi, eta):
    """P2 shape functions and reference gradients; local order v0 v1 v2 e01 e12 e20."""
    l0, l1, l2 = 1 - xi - eta, xi, eta
    phi = np.stack([l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0], axis=-1)
    dl = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    L = [l0, l1, l2]
    grads = []
    for i in range(3):
        grads.append((4 * L[i] - 1)[..., None] * dl[i])
    for a, b in ((0, 1), (1, 2), (2, 0)):
        grads.append(4 * (L[a][..., None] * dl[b] + L[b][..., None] * dl[a]))
    return phi, np.stack(grads, axis=-2)


_PHI, _DPHI = _shape(_TRI_PTS[:, 0], _TRI_PTS[:, 1])


def edge_shape(t):
    """1-D P2 shape functions on a facet: endpoint a, endpoint b, midpoint."""
    t = np.asarray(t, dtype=float)
    return np.stack([(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)], axis=-1)


@dataclass(eq=False)
class P2Space:
    """P2 degrees of freedom on a mesh (vertices then edge midpoints)."""

    mesh: SimplicialMesh

    @cached_property
    def _edges(self):
        c = self.mesh.cells
        local = np.stack([c[:, [0, 1]], c[:, [1, 2]], c[:, [2, 0]]], axis=1)
        key = np.sort(local, axis=2).reshape(-1, 2)
        edges, inverse = np.unique(key, axis=0, return_inverse=True)
        return edges, inverse.reshape(-1, 3)

    @property
    def edges(self) -> np.ndarray:
        return self._edges[0]

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        return np.hstack([self.mesh.cells, self.mesh.nv + self._edges[1]])

    @property
    def ndofs(self) -> int:
        return self.mesh.nv + len(self.edges)

    @cached_property
    def _edge_index(self) -> dict:
        return {tuple(e): i for i, e in enumerate(self.edges.tolist())}

    def facet_dofs(self, facets: np.ndarray) -> np.ndarray:
        """``(nf, 3)`` dofs of facets: endpoint a, endpoint b, midpoint."""
        idx = self._edge_index
        mids = np.array([idx[tuple(sorted(f))] for f in facets.tolist()], dtype=np.int64) + self.mesh.nv
        return np.column_stack([facets, mids]) if len(facets) else np.zeros((0, 3), dtype=np.int64)

    def dof_coordinates(self, vertices=None) -> np.ndarray:
        v = self.mesh.vertices if vertices is None else vertices
        return np.vstack([v, 0.5 * (v[self.edges[:, 0]] + v[self.edges[:, 1]])])

    @cached_property
    def dirichlet_dofs(self) -> np.ndarray:
        fd = self.facet_dofs(self.mesh.facets_with_tag(DIRICHLET))
        return np.unique(fd.ravel())

    @cached_property
    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.ndofs, dtype=bool)
        mask[self.dirichlet_dofs] = False
        return np.flatnonzero(mask)

    @cached_property
    def _pattern(self):
        cd = self.cell_dofs
        rows = np.repeat(cd, 6, axis=1).ravel()
        cols = np.tile(cd, (1, 6)).ravel()
        return rows, cols


def _metric_factors(metric, pts):
    """``sqrt|g| g^{-1}`` and ``sqrt|g|`` at the points (flattened)."""
    if metric is None:
        m = len(pts)
        return np.broadcast_to(np.eye(2), (m, 2, 2)), np.ones(m)
    G = np.asarray(metric(pts), dtype=float)
    det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
    if np.any(det <= 0):
        raise ValueError("metric is not positive definite at a quadrature point")
    sg = np.sqrt(det)
    inv = np.empty_like(G)
    inv[:, 0, 0], inv[:, 1, 1] = G[:, 1, 1] / det, G[:, 0, 0] / det
    inv[:, 0, 1] = inv[:, 1, 0] = -G[:, 0, 1] / det
    return inv * sg[:, None, None], sg


def assemble(space: P2Space, vertices=None, metric=None):
    """Global stiffness and mass matrices (CSR) on all dofs."""
    mesh = space.mesh
    v = mesh.vertices if vertices is None else vertices
    metric = mesh.metric if metric is None else metric
    c = mesh.cells
    a, b, cc = v[c[:, 0]], v[c[:, 1]], v[c[:, 2]]
    J = np.stack([b - a, cc - a], axis=2)  # columns are the edge vectors
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(det <= 0):
        raise ValueError("inverted cell in assembly")
    Jinv = np.empty_like(J)
    Jinv[:, 0, 0], Jinv[:, 1, 1] = J[:, 1, 1] / det, J[:, 0, 0] / det
    Jinv[:, 0, 1], Jinv[:, 1, 0] = -J[:, 0, 1] / det, -J[:, 1, 0] / det
    # physical gradients: dphi_ref @ Jinv
    grads = np.einsum("qia,cab->cqib", _DPHI, Jinv)
    qp = a[:, None, :] + np.einsum("cab,qb->cqa", J, _TRI_PTS)
    A, sg = _metric_factors(metric, qp.reshape(-1, 2))
    A = A.reshape(len(c), len(_TRI_W), 2, 2)
    sg = sg.reshape(len(c), len(_TRI_W))
    wdet = det[:, None] * _TRI_W[None, :]
    Ke = np.einsum("cq,cqia,cqab,cqjb->cij", wdet, grads, A, grads)
    Me = np.einsum("cq,qi,qj->cij", wdet * sg, _PHI, _PHI)
    rows, cols = space._pattern
    n = space.ndofs
    K = sparse.csr_matrix((Ke.ravel(), (rows, cols)), shape=(n, n))
    M = sparse.csr_matrix((Me.ravel(), (rows, cols)), shape=(n, n))
    return K, M


def facet_geometry(space: P2Space, facets, vertices=None, metric=None):
    """Quadrature points, metric length weights and dofs on the given facets."""
    mesh = space.mesh
    v = mesh.vertices if vertices is None else vertices
    metric = mesh.metric if metric is None else metric
    xa, xb = v[facets[:, 0]], v[facets[:, 1]]
    tang = xb - xa
    pts = xa[:, None, :] + EDGE_T[None, :, None] * tang[:, None, :]
    if metric is None:
        speed = np.repeat(np.linalg.norm(tang, axis=1)[:, None], len(EDGE_T), axis=1)
    else:
        G = np.asarray(metric(pts.reshape(-1, 2))).reshape(len(facets), len(EDGE_T), 2, 2)
        speed = np.sqrt(np.einsum("fa,fqab,fb->fq", tang, G, tang))
    return pts, speed * EDGE_W[None, :], space.facet_dofs(facets)


def boundary_mass(space: P2Space, facets, vertices=None, metric=None):
    """P2 mass matrix of the facets with the metric length element (CSR, all dofs)."""
    _, w, dofs = facet_geometry(space, facets, vertices, metric)
    psi = edge_shape(EDGE_T)
    Me = np.einsum("fq,qi,qj->fij", w, psi, psi)
    rows = np.repeat(dofs, 3, axis=1).ravel()
    cols = np.tile(dofs, (1, 3)).ravel()
    n = space.ndofs
    return sparse.csr_matrix((Me.ravel(), (rows, cols)), shape=(n, n))


def volume(mesh: SimplicialMesh, vertices=None, metric=None) -> float:
    """Sum of cell measures under the mesh metric."""
    v = mesh.vertices if vertices is None else vertices
    metric = mesh.metric if metric is None else metric
    areas = mesh.cell_areas(v)
    if metric is None:
        return float(areas.sum())
    c = mesh.cells
    a, b, cc = v[c[:, 0]], v[c[:, 1]], v[c[:, 2]]
    J = np.stack([b - a, cc - a], axis=2)
    qp = a[:, None, :] + np.einsum("cab,qb->cqa", J, _TRI_PTS)
    _, sg = _metric_factors(metric, qp.reshape(-1, 2))
    sg = sg.reshape(len(c), len(_TRI_W))
    return float(np.sum(2 * areas[:, None] * _TRI_W[None, :] * sg))
