"""Deformations of boundary-edge domains and the first variation of lambda_1.

Domains live in coordinates where the wall is ``{y0 = 0}``.  A deformation
field keeping the wall invariant must have ``V0 = 0`` there; its flow moves a
mesh vertex by vertex.  The shape derivative of the first mixed eigenvalue is

    d lambda / dt = - int_{free} (d_nu u)^2 g(V, nu) ds,

with no contribution from the wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .fem.eigen import MixedEigenpair, solve_first_eigenpair
from .fem.mesh import DIRICHLET, NEUMANN, SimplicialMesh
from .fem.p2 import EDGE_W, P2Space, facet_geometry
from .hemisphere import HemisphereFunction, basis_matrix

__all__ = [
    "TransportError",
    "DeformationField",
    "flow_transport",
    "outward_normals",
    "hadamard_derivative",
    "normal_flux",
    "volume_preserving_projection",
    "ExtremalityResidual",
    "extremality_residual",
    "contact_angle",
    "finite_difference_derivative",
]

WALL_TOL = 1e-10


class TransportError(RuntimeError):
    """The flow inverted a cell."""


@dataclass(frozen=True)
class DeformationField:
    """Vector field ``V(points) -> (m, 2)`` on a neighbourhood of the domain.

    ``tangent_to_wall`` declares ``V0 = 0`` on ``{y0 = 0}``; it is checked on
    wall samples at construction.
    """

    func: Callable
    tangent_to_wall: bool = True
    label: str = "V"

    def __post_init__(self):
        if self.tangent_to_wall:
            y1 = np.linspace(-3.0, 3.0, 61)
            vals = self(np.column_stack([np.zeros_like(y1), y1]))
            if np.max(np.abs(vals[:, 0])) > WALL_TOL:
                raise ValueError(f"field {self.label} is not tangent to the wall")

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self.func(pts), dtype=float).reshape(pts.shape)

    def __sub__(self, other: "DeformationField") -> "DeformationField":
        return DeformationField(lambda y: self(y) - other(y), self.tangent_to_wall and other.tangent_to_wall, f"{self.label}-{other.label}")

    def scaled(self, c: float) -> "DeformationField":
        return DeformationField(lambda y: c * self(y), self.tangent_to_wall, f"{c:g}*{self.label}")

    @classmethod
    def zero(cls) -> "DeformationField":
        return cls(lambda y: np.zeros_like(y), True, "zero")

    @classmethod
    def radial(cls) -> "DeformationField":
        """``V(y) = y``; its flow is the dilation by ``e^t``."""
        return cls(lambda y: y.copy(), True, "radial")

    @classmethod
    def translation(cls, direction: float = 1.0) -> "DeformationField":
        """Constant field parallel to the wall."""
        return cls(lambda y: np.column_stack([np.zeros(len(y)), np.full(len(y), direction)]), True, "translation")

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 2, scale: float = 0.5) -> "DeformationField":
        """Polynomial field ``(y0 P(y), Q(y))`` with Gaussian coefficients."""
        powers = [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]
        a = scale * rng.normal(size=len(powers))
        b = scale * rng.normal(size=len(powers))

        def func(y, a=a, b=b):
            mono = np.column_stack([y[:, 0] ** i * y[:, 1] ** j for i, j in powers])
            return np.column_stack([y[:, 0] * (mono @ a), mono @ b])

        return cls(func, True, "random")

    @classmethod
    def interior(cls, rng: np.random.Generator, degree: int = 2, scale: float = 0.5, radius: float | None = None) -> "DeformationField":
        """Random tangent field with no normal component on the free boundary.

        Without ``radius`` the field is multiplied by ``1 - |y|^2`` and vanishes
        on the unit circle; with ``radius`` by ``max(0, 1 - |y|^2/radius^2)^2``,
        which is C^1 and supported in the disk of that radius.
        """
        base = cls.random(rng, degree, scale)
        if radius is None:
            return cls(lambda y: (1.0 - np.sum(y**2, axis=1))[:, None] * base(y), True, "interior")
        r2 = float(radius) ** 2
        return cls(lambda y: (np.maximum(0.0, 1.0 - np.sum(y**2, axis=1) / r2) ** 2)[:, None] * base(y), True, f"interior(r={radius})")


def flow_transport(mesh: SimplicialMesh, V: DeformationField, t: float) -> SimplicialMesh:
    """Move every vertex along the flow of ``V`` for time ``t``.

    Uses DOP853 at tolerance 1e-12; raises :class:`TransportError` if a cell
    inverts.
    """
    y0 = mesh.vertices.ravel()
    if t == 0.0:
        return mesh.with_vertices(mesh.vertices)
    rhs = lambda _s, y: V(y.reshape(-1, 2)).ravel()
    sol = integrate.solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=1e-12, atol=1e-12)
    if not sol.success:
        raise TransportError(f"flow integration failed at t={t}: {sol.message}")
    moved = mesh.with_vertices(sol.y[:, -1].reshape(-1, 2))
    if np.any(moved.cell_areas() <= 0):
        raise TransportError(f"cell inversion at t={t}")
    if V.tangent_to_wall:
        wall = np.unique(mesh.facets_with_tag(NEUMANN).ravel())
        on_wall = wall[np.abs(mesh.vertices[wall, 0]) <= 1e-14]
        if np.any(np.abs(moved.vertices[on_wall, 0]) > 1e-9):
            raise TransportError("wall vertices left the wall")
    return moved


def outward_normals(mesh: SimplicialMesh, facets: np.ndarray, vertices=None) -> np.ndarray:
    """Euclidean unit outward normals (covectors) of boundary facets."""
    v = mesh.vertices if vertices is None else vertices
    third = {}
    for c in mesh.cells.tolist():
        for k in range(3):
            a, b = c[k], c[(k + 1) % 3]
            third[(min(a, b), max(a, b))] = c[(k + 2) % 3]
    opp = np.array([third[(min(a, b), max(a, b))] for a, b in facets.tolist()], dtype=np.int64)
    tang = v[facets[:, 1]] - v[facets[:, 0]]
    n = np.column_stack([tang[:, 1], -tang[:, 0]])
    n /= np.linalg.norm(n, axis=1)[:, None]
    inward = np.sum(n * (v[opp] - v[facets[:, 0]]), axis=1) > 0
    n[inward] *= -1
    return n


def _metric_normal_component(n, pts, V, metric):
    """``g(V, nu)`` with ``nu`` the g-unit normal whose covector is ``n``."""
    Vq = V(pts.reshape(-1, 2)).reshape(pts.shape)
    nn = np.broadcast_to(n[:, None, :], pts.shape)
    flux = np.sum(nn * Vq, axis=-1)
    if metric is None:
        return flux
    G = np.asarray(metric(pts.reshape(-1, 2))).reshape(pts.shape[:-1] + (2, 2))
    Ginv = np.linalg.inv(G)
    return flux / np.sqrt(np.einsum("fqa,fqab,fqb->fq", nn, Ginv, nn))


def normal_flux(mesh: SimplicialMesh, V: DeformationField, vertices=None, metric=None, tag: int = DIRICHLET) -> float:
    """``int g(V, nu) ds`` over the facets with ``tag``."""
    facets = mesh.facets_with_tag(tag)
    vertices = mesh.vertices if vertices is None else vertices
    metric = mesh.metric if metric is None else metric
    pts, w, _ = facet_geometry(P2Space(mesh), facets, vertices, metric)
    n = outward_normals(mesh, facets, vertices)
    return float(np.sum(w * _metric_normal_component(n, pts, V, metric)))


def hadamard_derivative(pair: MixedEigenpair, V: DeformationField) -> float:
    """``-int (d_nu u)^2 g(V, nu) ds`` over the Dirichlet facets."""
    mesh = pair.mesh
    facets = mesh.facets_with_tag(DIRICHLET)
    f = pair.flux
    n = outward_normals(mesh, facets, pair.vertices)
    vn = _metric_normal_component(n, f.points, V, pair.metric)
    return float(-np.sum(f.weights * f.values**2 * vn))


def volume_preserving_projection(V: DeformationField, mesh: SimplicialMesh, reference: DeformationField | None = None, vertices=None, metric=None) -> DeformationField:
    """``V - c W`` with ``c`` chosen so the free-boundary normal flux vanishes."""
    W = DeformationField.radial() if reference is None else reference
    fw = normal_flux(mesh, W, vertices, metric)
    if abs(fw) < 1e-12:
        raise ValueError("reference field has zero normal flux")
    c = normal_flux(mesh, V, vertices, metric) / fw
    out = V - W.scaled(c)
    object.__setattr__(out, "label", f"P({V.label})")
    return out


def finite_difference_derivative(mesh: SimplicialMesh, V: DeformationField, t: float = 1e-3, *, metric=None) -> dict:
    """Central differences of ``lambda(t)`` at ``t`` and ``t/2`` with one Richardson step."""
    lam = {}
    for s in (t, -t, t / 2, -t / 2):
        moved = flow_transport(mesh, V, s)
        lam[s] = solve_first_eigenpair(moved, metric=metric).eigenvalue
    d1 = (lam[t] - lam[-t]) / (2 * t)
    d2 = (lam[t / 2] - lam[-t / 2]) / t
    return {"coarse": d1, "fine": d2, "richardson": (4 * d2 - d1) / 3}


@dataclass(frozen=True)
class ExtremalityResidual:
    """Flux deviation from its mean.

    ``scalar`` is ``std/|mean|`` of the facet fluxes, ``function`` the
    zero-mean deviation pulled back to ``S^1_+`` by the polar angle.
    """

    scalar: float
    mean_flux: float
    function: HemisphereFunction


def _polar_weights(points, weights_unit, tang):
    """``d theta`` weights at facet quadrature points, ``theta = atan2(y0, y1)``."""
    y0, y1 = points[..., 0], points[..., 1]
    dtheta = (y1 * tang[:, None, 0] - y0 * tang[:, None, 1]) / (y0**2 + y1**2)
    return np.abs(dtheta) * weights_unit


def extremality_residual(pair: MixedEigenpair, lmax: int = 16, *, center=(0.0, 0.0)) -> ExtremalityResidual:
    """Scalar and hemisphere-function extremality residual of a solved pair.

    The free boundary must be a radial graph about ``center`` over the polar
    angle in ``[0, pi]``.
    """
    mesh = pair.mesh
    facets = mesh.facets_with_tag(DIRICHLET)
    f = pair.flux
    v = pair.vertices - np.asarray(center)
    pts = f.points - np.asarray(center)
    tang = v[facets[:, 1]] - v[facets[:, 0]]
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r < 1e-12) or np.any(pts[..., 0] < -1e-12):
        raise ValueError("free boundary is not a radial graph over the half-plane")
    w = _polar_weights(pts, np.broadcast_to(EDGE_W, pts.shape[:-1]), tang)
    theta = np.arctan2(pts[..., 0], pts[..., 1])
    # radial graph: polar angle strictly monotone along each facet
    cross = v[facets[:, 0], 1] * v[facets[:, 1], 0] - v[facets[:, 0], 0] * v[facets[:, 1], 1]
    if np.any(np.abs(cross) < 1e-14) or abs(np.sum(w) - math.pi) > 1e-9:
        raise ValueError("free boundary is not a radial graph over the polar angle")
    dirs = np.column_stack([np.sin(theta.ravel()), np.cos(theta.ravel())])
    B = basis_matrix(1, lmax, dirs)
    coeffs = B.T @ (w.ravel() * f.values.ravel())
    func = HemisphereFunction(1, lmax, coeffs).without_mean()
    mean = f.mean()
    return ExtremalityResidual(f.std() / abs(mean), mean, func)


def _tangent_at(points, metric):
    """Tangent at ``points[0]`` of the quadratic through three points (chord parametrised)."""
    p0, p1, p2 = points
    s1 = np.linalg.norm(p1 - p0)
    s2 = s1 + np.linalg.norm(p2 - p1)
    d = -(1 / s1 + 1 / s2) * p0 + s2 / (s1 * (s2 - s1)) * p1 - s1 / (s2 * (s2 - s1)) * p2
    G = np.eye(2) if metric is None else np.asarray(metric(p0[None]))[0]
    return d / math.sqrt(d @ G @ d), G


def _chain_from(corner, facets, n):
    """First ``n`` vertices of a facet chain starting at ``corner``."""
    adj = {}
    for a, b in facets.tolist():
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    chain, prev = [corner], None
    while len(chain) < n:
        nxt = [x for x in adj.get(chain[-1], []) if x != prev]
        if not nxt:
            break
        prev = chain[-1]
        chain.append(nxt[0])
    return chain


def contact_angle(mesh: SimplicialMesh, vertices=None, metric=None) -> np.ndarray:
    """Angle inside the domain between free boundary and wall at each edge point.

    Both directions are tangents at the edge point of quadratics through the
    three nearest boundary vertices on each side.
    """
    v = mesh.vertices if vertices is None else vertices
    metric = mesh.metric if metric is None else metric
    corners = mesh.boundary_edge_vertices
    if len(corners) == 0:
        raise ValueError("domain has no edge points")
    out = []
    for c in corners.tolist():
        free = _chain_from(c, mesh.facets_with_tag(DIRICHLET), 3)
        wall = _chain_from(c, mesh.facets_with_tag(NEUMANN), 3)
        tf, G = _tangent_at(v[free], metric)
        tw, _ = _tangent_at(v[wall], metric)
        out.append(math.acos(max(-1.0, min(1.0, float(tf @ G @ tw)))))
    return np.array(out)
