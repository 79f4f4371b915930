"""First mixed eigenpair and its Dirichlet flux.

Solves ``-Delta_g u = lambda u`` with ``u = 0`` on the Dirichlet facets and
``d_nu u = 0`` on the Neumann facets.  The flux ``d_nu u`` on the Dirichlet
part (outward normal, so it is negative for the positive eigenfunction) is
recovered variationally: the residual ``K u - lambda M u`` at the Dirichlet
dofs equals the boundary mass matrix applied to the flux.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .mesh import DIRICHLET, SimplicialMesh
from .p2 import EDGE_T, P2Space, assemble, boundary_mass, edge_shape, facet_geometry, volume

__all__ = ["EigensolverError", "MixedEigenpair", "solve_first_eigenpair", "recover_flux", "FluxTrace"]


_WARMUP = 4


class EigensolverError(RuntimeError):
    """Inverse iteration did not reach the residual tolerance."""


@dataclass
class FluxTrace:
    """Flux on the Dirichlet facets at the facet quadrature points.

    Attributes
    ----------
    points : ndarray, shape (nf, q, 2)
    weights : ndarray, shape (nf, q)
        Metric arclength weights.
    values : ndarray, shape (nf, q)
        ``d_nu u`` at the points.
    nodal : ndarray
        P2 flux coefficients on all dofs (zero away from the Dirichlet part).
    """

    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    nodal: np.ndarray

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    def mean(self) -> float:
        return float(np.sum(self.weights * self.values) / self.length)

    def std(self) -> float:
        """Length-weighted spread of the facet means ``q_F``.

        Inside a straight facet the flux of a curved domain oscillates at
        O(h); the facet means are the O(h^2) quantity.
        """
        m = self.mean()
        L = np.sum(self.weights, axis=1)
        return float(math.sqrt(np.sum(L * (self.facet_means() - m) ** 2) / self.length))

    def pointwise_std(self) -> float:
        m = self.mean()
        return float(math.sqrt(np.sum(self.weights * (self.values - m) ** 2) / self.length))

    def facet_means(self) -> np.ndarray:
        """Length-weighted mean flux ``q_F`` of each facet."""
        return np.sum(self.weights * self.values, axis=1) / np.sum(self.weights, axis=1)

    def integrate(self, func) -> float:
        """``int F f ds`` for ``f(points) -> (nf, q)``."""
        return float(np.sum(self.weights * self.values * func(self.points)))


@dataclass
class MixedEigenpair:
    """First eigenpair on a mesh with the Dirichlet flux.

    ``u`` is normalised by ``u^T M u = 1`` and is positive inside.
    """

    eigenvalue: float
    u: np.ndarray
    space: P2Space
    residual: float
    iterations: int
    flux: FluxTrace
    volume: float
    vertices: np.ndarray
    metric: object = None
    info: dict = field(default_factory=dict)

    @property
    def mesh(self) -> SimplicialMesh:
        return self.space.mesh

    def flux_stats(self) -> dict:
        q = self.flux.facet_means()
        return {"mean": self.flux.mean(), "std": self.flux.std(), "pointwise_std": self.flux.pointwise_std(), "min": float(q.min()), "max": float(q.max()), "length": self.flux.length}

    def to_dict(self) -> dict:
        return {
            "eigenvalue": self.eigenvalue,
            "residual": self.residual,
            "iterations": self.iterations,
            "volume": self.volume,
            "dofs": int(self.space.ndofs),
            "flux": self.flux_stats(),
            "mesh": self.mesh.stats(),
            **self.info,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _inverse_iteration(K, M, shift, tol, maxiter):
    lu = spla.splu(sparse.csc_matrix(K - shift * M))
    u = np.ones(K.shape[0])
    lam = float("nan")
    for it in range(1, maxiter + 1):
        u = lu.solve(M @ u)
        Mu = M @ u
        norm = math.sqrt(float(u @ Mu))
        u /= norm
        Mu /= norm
        lam = float(u @ (K @ u))
        res = float(np.linalg.norm(K @ u - lam * Mu) / np.linalg.norm(Mu))
        if res <= tol:
            return u, lam, res, it
    raise EigensolverError(f"inverse iteration stalled at residual {res:.3e} (lambda ~ {lam:.8f})")


def _flux(space: P2Space, u, eigenvalue, K, M, vertices=None, metric=None) -> FluxTrace:
    facets = space.mesh.facets_with_tag(DIRICHLET)
    dd = space.dirichlet_dofs
    r = (K @ u - eigenvalue * (M @ u))[dd]
    B = boundary_mass(space, facets, vertices, metric)[dd][:, dd]
    q = spla.spsolve(sparse.csc_matrix(B), r)
    nodal = np.zeros(space.ndofs)
    nodal[dd] = q
    pts, w, fdofs = facet_geometry(space, facets, vertices, metric)
    vals = nodal[fdofs] @ edge_shape(EDGE_T).T
    return FluxTrace(pts, w, vals, nodal)


def recover_flux(pair: MixedEigenpair) -> FluxTrace:
    """Variationally consistent ``d_nu u`` on the Dirichlet facets of a solved pair.

    Solves ``int q phi ds = int (grad u . grad phi - lambda u phi)`` for all
    P2 boundary test functions ``phi``.
    """
    K, M = assemble(pair.space, pair.vertices, pair.metric)
    return _flux(pair.space, pair.u, pair.eigenvalue, K, M, pair.vertices, pair.metric)


def solve_first_eigenpair(mesh: SimplicialMesh, *, vertices=None, metric=None, tol: float = 1e-10, maxiter: int = 200) -> MixedEigenpair:
    """First mixed Dirichlet/Neumann eigenpair by shifted inverse iteration.

    A few unshifted steps give a lower-side estimate ``rho``; the iteration
    then continues with shift ``0.99 rho``, which keeps the factorisation
    positive definite while the first eigenvalue dominates strongly.
    """
    space = P2Space(mesh)
    vertices = mesh.vertices if vertices is None else np.asarray(vertices, dtype=float)
    metric = mesh.metric if metric is None else metric
    if len(space.dirichlet_dofs) == 0:
        raise ValueError("mesh has no Dirichlet facets")
    K, M = assemble(space, vertices, metric)
    free = space.free_dofs
    Kf, Mf = K[free][:, free].tocsc(), M[free][:, free].tocsc()
    lu = spla.splu(Kf)
    u = np.ones(len(free))
    for _ in range(_WARMUP):
        u = lu.solve(Mf @ u)
        u /= math.sqrt(float(u @ (Mf @ u)))
    rho = float(u @ (Kf @ u))
    uf, lam, res, it = _inverse_iteration(Kf, Mf, 0.99 * rho, tol, maxiter)
    u = np.zeros(space.ndofs)
    u[free] = uf
    if u.sum() < 0:
        u = -u
    flux = _flux(space, u, lam, K, M, vertices, metric)
    vol = volume(mesh, vertices, metric)
    return MixedEigenpair(lam, u, space, res, it + _WARMUP, flux, vol, vertices, metric, {"shift": 0.99 * rho})
