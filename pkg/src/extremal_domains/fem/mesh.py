"""Triangular meshes of star-shaped boundary-edge domains.

A domain is described over polar parameters ``(s, t)`` with ``s`` in
``[0, 1]`` and the angle ``t`` in ``[0, span]``; the physical point is

    y = s * rho(t) * (sin t, cos t),

so column 0 (``y0``) is the coordinate normal to the wall ``{y0 = 0}`` and
the free boundary is the radial graph ``r = rho(t)``.  Rings of vertices are
laid out at decreasing ``s`` and consecutive rings are stitched together; the
local size shrinks to ``grading * h`` at the edge points (free boundary meets
wall) where the solution is least regular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = ["DIRICHLET", "NEUMANN", "DomainSpec", "SimplicialMesh", "mesh_domain", "rectangle_mesh", "read_mesh", "write_mesh"]

DIRICHLET = 1
NEUMANN = 2
_TAG_NAMES = {DIRICHLET: "D", NEUMANN: "N"}
_TAG_CODES = {v: k for k, v in _TAG_NAMES.items()}


@dataclass(frozen=True)
class DomainSpec:
    """Star-shaped domain ``{s rho(t) (sin t, cos t)}`` over an angular sector.

    Attributes
    ----------
    radius : callable
        Vectorised ``rho(t) > 0``.
    span : float
        Angular extent; ``pi`` gives a half-domain on the wall ``y0 = 0``,
        ``2 pi`` a closed domain without wall.
    side_tags : tuple
        Tags of the straight sides ``t = 0`` and ``t = span``.
    arc_tag : int
        Tag of the curved side ``s = 1``.
    """

    radius: Callable
    span: float = math.pi
    side_tags: tuple = (NEUMANN, NEUMANN)
    arc_tag: int = DIRICHLET
    label: str = "domain"

    @property
    def closed(self) -> bool:
        return abs(self.span - 2 * math.pi) < 1e-14

    @classmethod
    def half_disk(cls, radius: float = 1.0) -> "DomainSpec":
        return cls(lambda t: np.full_like(np.asarray(t, dtype=float), radius), label=f"half_disk(r={radius})")

    @classmethod
    def disk(cls, radius: float = 1.0) -> "DomainSpec":
        return cls(lambda t: np.full_like(np.asarray(t, dtype=float), radius), span=2 * math.pi, label="disk")

    @classmethod
    def quarter_disk(cls, radius: float = 1.0) -> "DomainSpec":
        return cls(lambda t: np.full_like(np.asarray(t, dtype=float), radius), span=math.pi / 2, label="quarter_disk")

    @classmethod
    def radial_graph(cls, v: Callable, eps: float = 1.0, label: str = "radial_graph") -> "DomainSpec":
        """Free boundary ``r = eps (1 + v(t))``; rejects ``v <= -1``."""
        t = np.linspace(0.0, math.pi, 2049)
        if np.any(np.asarray(v(t)) <= -1.0):
            raise ValueError("degenerate domain: 1 + v must stay positive")
        return cls(lambda tt: eps * (1.0 + np.asarray(v(tt), dtype=float)), label=label)

    @classmethod
    def half_ellipse(cls, a: float, b: float, tilt: float = 0.0) -> "DomainSpec":
        """Ellipse with semi-axes ``a`` (along y0) and ``b`` (along y1) rotated by
        ``tilt`` about the origin and cut by the wall."""

        def rho(t):
            t = np.asarray(t, dtype=float) - tilt
            return 1.0 / np.sqrt((np.sin(t) / a) ** 2 + (np.cos(t) / b) ** 2)

        return cls(rho, label=f"half_ellipse({a},{b},{tilt})")


@dataclass(eq=False)
class SimplicialMesh:
    """Conforming triangle mesh with tagged boundary facets.

    Attributes
    ----------
    vertices : ndarray, shape (nv, 2)
    cells : ndarray, shape (nc, 3)
        Counter-clockwise vertex triples.
    facets : ndarray, shape (nf, 2)
        Boundary edges.
    tags : ndarray, shape (nf,)
        ``DIRICHLET`` or ``NEUMANN`` per facet.
    metric : callable or None
        ``metric(points) -> (m, 2, 2)`` Riemannian metric; ``None`` is Euclidean.
    """

    vertices: np.ndarray
    cells: np.ndarray
    facets: np.ndarray
    tags: np.ndarray
    grading: float = 1.0
    h: float = float("nan")
    metric: Callable | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int64)
        self.facets = np.ascontiguousarray(self.facets, dtype=np.int64)
        self.tags = np.ascontiguousarray(self.tags, dtype=np.int64)

    @property
    def nv(self) -> int:
        return len(self.vertices)

    def with_vertices(self, vertices: np.ndarray) -> "SimplicialMesh":
        """Same topology and tags, moved vertices."""
        return SimplicialMesh(vertices.copy(), self.cells, self.facets, self.tags, self.grading, self.h, self.metric, dict(self.info))

    def with_metric(self, metric) -> "SimplicialMesh":
        return SimplicialMesh(self.vertices, self.cells, self.facets, self.tags, self.grading, self.h, metric, dict(self.info))

    def cell_areas(self, vertices=None) -> np.ndarray:
        v = self.vertices if vertices is None else vertices
        a, b, c = v[self.cells[:, 0]], v[self.cells[:, 1]], v[self.cells[:, 2]]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def facet_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.linalg.norm(v[self.facets[:, 1]] - v[self.facets[:, 0]], axis=1)

    @cached_property
    def boundary_edge_vertices(self) -> np.ndarray:
        """Vertices shared by a Dirichlet and a Neumann facet (the edge set)."""
        d = set(self.facets[self.tags == DIRICHLET].ravel().tolist())
        nmn = set(self.facets[self.tags == NEUMANN].ravel().tolist())
        return np.array(sorted(d & nmn), dtype=np.int64)

    def facets_with_tag(self, tag: int) -> np.ndarray:
        return self.facets[self.tags == tag]

    def validate(self) -> None:
        """Raise ``ValueError`` on inverted cells, bad tags or non-conformity."""
        if np.any(self.cell_areas() <= 0):
            raise ValueError("mesh has inverted or degenerate cells")
        edges = np.sort(np.vstack([self.cells[:, [0, 1]], self.cells[:, [1, 2]], self.cells[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise ValueError("non-conforming mesh: an edge is shared by more than two cells")
        bnd = {tuple(e) for e in uniq[counts == 1].tolist()}
        tagged = [tuple(e) for e in np.sort(self.facets, axis=1).tolist()]
        if len(tagged) != len(set(tagged)) or set(tagged) != bnd:
            raise ValueError("every boundary facet must be tagged exactly once")
        if not set(np.unique(self.tags).tolist()) <= {DIRICHLET, NEUMANN}:
            raise ValueError("unknown facet tag")

    def stats(self) -> dict:
        lengths = self.facet_lengths()
        return {
            "vertices": int(self.nv),
            "cells": int(len(self.cells)),
            "facets": int(len(self.facets)),
            "min_facet": float(lengths.min()),
            "max_facet": float(lengths.max()),
            "edge_points": int(len(self.boundary_edge_vertices)),
        }


def _size(h, grading, transition, corners, pts):
    if len(corners) == 0:
        return np.full(len(pts), h)
    d = np.min(np.linalg.norm(pts[:, None, :] - corners[None, :, :], axis=2), axis=1)
    return h * np.minimum(1.0, grading + (1.0 - grading) * d / transition)


def _unit_point(s, t):
    return np.column_stack([s * np.sin(t), s * np.cos(t)])


def _ring_angles(s, span, closed, h, grading, transition, corners):
    """Angles on the ring of radius ``s`` spaced by the local size."""
    if closed:
        m = max(6, int(math.ceil(2 * math.pi * s / h)))
        return np.linspace(0.0, 2 * math.pi, m + 1)
    half = span / 2
    t, out = 0.0, [0.0]
    while t < half:
        sz = _size(h, grading, transition, corners, _unit_point(np.array([s]), np.array([t])))[0]
        t += sz / s
        out.append(t)
    arr = np.array(out)
    # stretch so the last step lands on the midpoint, then mirror
    arr = arr * (half / arr[-1]) if len(arr) > 2 else np.array([0.0, half])
    if len(arr) > 2 and arr[-1] - arr[-2] < 0.3 * (arr[1] - arr[0]):
        arr = np.delete(arr, -2)
    return np.concatenate([arr, span - arr[-2::-1]])


def mesh_domain(spec: DomainSpec, h: float, grading: float = 0.5, transition: float = 0.25) -> SimplicialMesh:
    """Ring mesh of ``spec`` with target size ``h`` and size ``grading * h`` at the edge points."""
    if not (0 < h <= 0.5):
        raise ValueError("h must lie in (0, 0.5]")
    if not (0 < grading <= 1):
        raise ValueError("grading must lie in (0, 1]")
    closed = spec.closed
    span = spec.span
    corners = np.zeros((0, 2)) if closed else _unit_point(np.array([1.0, 1.0]), np.array([0.0, span]))
    # ring radii marching inward from the free boundary
    radii = [1.0]
    while True:
        s = radii[-1]
        step = _size(h, grading, transition, corners, _unit_point(np.array([s]), np.array([0.0])))[0] if not closed else h
        if s - step < 0.6 * step:
            break
        radii.append(s - step)
    radii = np.array(radii[::-1])
    param = [(0.0, 0.0)]
    rings = []
    for s in radii:
        ang = _ring_angles(s, span, closed, h, grading, transition, corners)
        idx = []
        for j, t in enumerate(ang):
            if closed and j == len(ang) - 1:
                idx.append(idx[0])
                continue
            idx.append(len(param))
            param.append((s, t))
        rings.append((ang, idx))
    param = np.array(param)
    s_all, t_all = param[:, 0], param[:, 1]
    rho = np.asarray(spec.radius(t_all), dtype=float) * np.ones_like(t_all)
    sin_t, cos_t = np.sin(t_all), np.cos(t_all)
    # exact zeros on the wall rays
    for wall_t in (0.0, math.pi, 2 * math.pi):
        on = np.abs(t_all - wall_t) < 1e-15
        sin_t[on] = 0.0
        cos_t[on] = math.cos(wall_t)
    on = np.abs(t_all - math.pi / 2) < 1e-15
    cos_t[on] = 0.0
    sin_t[on] = 1.0
    vertices = np.column_stack([s_all * rho * sin_t, s_all * rho * cos_t])
    vertices[0] = 0.0

    cells = []
    # open sectors are stitched on the first half and mirrored, so the
    # topology is symmetric under t -> span - t
    def stop(ring):
        return len(ring[1]) - 1 if closed else (len(ring[1]) - 1) // 2

    ang0, idx0 = rings[0]
    for j in range(stop(rings[0])):
        cells.append((0, idx0[j], idx0[j + 1]))
    for (ang_a, ia), (ang_b, ib) in zip(rings[:-1], rings[1:]):
        i = j = 0
        p, q = stop((ang_a, ia)), stop((ang_b, ib))
        while i < p or j < q:
            if i < p and (j == q or ang_a[i + 1] <= ang_b[j + 1]):
                cells.append((ia[i], ib[j], ia[i + 1]))
                i += 1
            else:
                cells.append((ia[i], ib[j], ib[j + 1]))
                j += 1
    if not closed:
        mirror = np.arange(len(param))
        for _, idx in rings:
            mirror[idx] = idx[::-1]
        cells += [tuple(mirror[list(c)]) for c in cells]
    cells = np.array(cells, dtype=np.int64)
    # orient counter-clockwise in (y0, y1)
    tmp = SimplicialMesh(vertices, cells, np.zeros((0, 2)), np.zeros(0))
    neg = tmp.cell_areas() < 0
    cells[neg] = cells[neg][:, [0, 2, 1]]

    facets, tags = [], []
    ang_out, idx_out = rings[-1]
    for j in range(len(idx_out) - 1):
        facets.append((idx_out[j], idx_out[j + 1]))
        tags.append(spec.arc_tag)
    if not closed:
        for side, tag in zip((0, -1), spec.side_tags):
            chain = [0] + [ring[1][side] for ring in rings]
            for a, b in zip(chain[:-1], chain[1:]):
                facets.append((a, b))
                tags.append(tag)
    mesh = SimplicialMesh(vertices, cells, np.array(facets), np.array(tags), grading, h, None, {"spec": spec.label, "rings": len(rings)})
    mesh.validate()
    return mesh


def rectangle_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0, tags=(DIRICHLET,) * 4) -> SimplicialMesh:
    """Structured mesh of ``[0, width] x [0, height]`` with criss-cross diagonals.

    ``tags`` are for the sides ``y0 = 0``, ``y1 = 0``, ``y0 = width``, ``y1 = height``.
    """
    x = np.linspace(0.0, width, nx + 1)
    y = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    vid = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    verts = [np.column_stack([X.ravel(), Y.ravel()])]
    centres = 0.25 * (X[:-1, :-1] + X[1:, :-1] + X[:-1, 1:] + X[1:, 1:]), 0.25 * (Y[:-1, :-1] + Y[1:, :-1] + Y[:-1, 1:] + Y[1:, 1:])
    verts.append(np.column_stack([centres[0].ravel(), centres[1].ravel()]))
    cid = vid.size + np.arange(nx * ny).reshape(nx, ny)
    a, b, c, d = vid[:-1, :-1], vid[1:, :-1], vid[1:, 1:], vid[:-1, 1:]
    cells = np.concatenate([np.stack([a, b, cid], -1), np.stack([b, c, cid], -1), np.stack([c, d, cid], -1), np.stack([d, a, cid], -1)]).reshape(-1, 3)
    sides = [vid[0, :], vid[:, 0], vid[-1, :], vid[:, -1]]
    facets = np.concatenate([np.column_stack([sd[:-1], sd[1:]]) for sd in sides])
    ftags = np.concatenate([np.full(len(sd) - 1, t) for sd, t in zip(sides, tags)])
    mesh = SimplicialMesh(np.vstack(verts), cells, facets, ftags, 1.0, max(width / nx, height / ny), None, {"spec": "rectangle"})
    mesh.validate()
    return mesh


def write_mesh(mesh: SimplicialMesh, path) -> None:
    """Plain-text format: ``DIM NV NC NF`` header, vertices, cells, tagged facets."""
    lines = [f"2 {mesh.nv} {len(mesh.cells)} {len(mesh.facets)}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += [f"{a} {b} {c}" for a, b, c in mesh.cells]
    lines += [f"{a} {b} {_TAG_NAMES[int(t)]}" for (a, b), t in zip(mesh.facets, mesh.tags)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> SimplicialMesh:
    rows = Path(path).read_text().split("\n")
    dim, nv, nc, nf = (int(v) for v in rows[0].split())
    if dim != 2:
        raise ValueError("only two-dimensional meshes are supported")
    body = rows[1:]
    verts = np.array([[float(v) for v in r.split()] for r in body[:nv]])
    cells = np.array([[int(v) for v in r.split()] for r in body[nv : nv + nc]], dtype=np.int64)
    fac, tags = [], []
    for r in body[nv + nc : nv + nc + nf]:
        a, b, t = r.split()
        fac.append((int(a), int(b)))
        tags.append(_TAG_CODES[t])
    mesh = SimplicialMesh(verts, cells, np.array(fac, dtype=np.int64), np.array(tags))
    mesh.validate()
    return mesh
