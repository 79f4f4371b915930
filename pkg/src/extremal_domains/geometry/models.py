"""Manifold-with-boundary models given by symbolic metrics.

A model lives on a coordinate patch ``z = (z0, z1, ..., zn)`` with metric
``G(z)`` and boundary ``{z0 = b(z')}``; the manifold is the side ``z0 >= b``.
Euclidean epigraphs use ``G = I`` and ``b = h``; analytic patches use a given
metric and (by default) ``b = 0``.  Numerical callables are generated once
from the symbolic data with :func:`sympy.lambdify`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import sympy as sp

__all__ = [
    "ManifoldModel",
    "EuclideanEpigraph",
    "AnalyticMetricPatch",
    "half_space",
    "sphere_cap",
    "model_from_config",
    "load_model",
    "ConfigError",
]


class ConfigError(ValueError):
    """Malformed or unknown model description."""


def _symbols(n: int):
    return sp.symbols(" ".join(f"z{i}" for i in range(n + 1)), real=True)


def _lambdify_array(args, expr, shape):
    """Callable returning a float array of ``shape`` (constants broadcast)."""
    flat = sp.Array(expr).reshape(int(np.prod(shape))).tolist() if shape else [expr]
    f = sp.lambdify(args, flat, modules="numpy")

    def call(*vals):
        out = np.array([np.asarray(v, dtype=float) for v in f(*vals)], dtype=float)
        return out.reshape(shape) if shape else out[0]

    return call


@dataclass(frozen=True, eq=False)
class ManifoldModel:
    """Symbolic metric on a patch with a graph boundary.

    Attributes
    ----------
    n : int
        Boundary dimension; the manifold has dimension ``n + 1``.
    metric : sympy.Matrix
        ``(n+1) x (n+1)`` metric in the patch coordinates ``z0..zn``.
    boundary : sympy.Expr
        ``b(z1..zn)``; the boundary is ``z0 = b`` and the manifold is ``z0 >= b``.
    bounds : ndarray
        ``(n+1, 2)`` coordinate box in which the model is valid.
    name : str
        Label used in reports.
    """

    n: int
    metric: sp.Matrix
    boundary: sp.Expr
    bounds: np.ndarray
    name: str = "model"
    description: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.n + 1

    @cached_property
    def coords(self):
        return _symbols(self.n)

    @cached_property
    def is_flat_euclidean(self) -> bool:
        return self.metric == sp.eye(self.dim)

    # symbolic pieces -------------------------------------------------
    @cached_property
    def christoffel_symbolic(self):
        """``Gamma[a][b][c] = Gamma^a_{bc}``."""
        return _christoffel(self.metric, self.coords)

    @cached_property
    def embedding_symbolic(self):
        """``Z(z') = (b(z'), z')`` as a column."""
        zb = self.coords[1:]
        return sp.Matrix([self.boundary] + list(zb))

    @cached_property
    def induced_metric_symbolic(self):
        zb = self.coords[1:]
        Z = self.embedding_symbolic
        J = Z.jacobian(zb)
        Gb = self.metric.subs(self.coords[0], self.boundary)
        return (J.T * Gb * J).applyfunc(sp.expand)

    @cached_property
    def normal_symbolic(self):
        """Unit normal along the boundary pointing into ``z0 > b``."""
        zb = self.coords[1:]
        Gb = self.metric.subs(self.coords[0], self.boundary)
        cov = sp.Matrix([1] + [-sp.diff(self.boundary, z) for z in zb])
        Ginv = Gb.inv()
        vec = Ginv * cov
        return vec / sp.sqrt((cov.T * Ginv * cov)[0, 0])

    # compiled numerics ----------------------------------------------
    @cached_property
    def metric_fn(self):
        return _lambdify_array(self.coords, self.metric, (self.dim, self.dim))

    @cached_property
    def christoffel_fn(self):
        m = self.dim
        return _lambdify_array(self.coords, self.christoffel_symbolic, (m, m, m))

    @cached_property
    def christoffel_derivative_fn(self):
        m = self.dim
        G = self.christoffel_symbolic
        d = [[[[sp.diff(G[a][b][c], self.coords[e]) for e in range(m)] for c in range(m)] for b in range(m)] for a in range(m)]
        return _lambdify_array(self.coords, d, (m, m, m, m))

    @cached_property
    def boundary_fn(self):
        return _lambdify_array(self.coords[1:], self.boundary, ())

    @cached_property
    def embedding_jacobian_fn(self):
        zb = self.coords[1:]
        return _lambdify_array(zb, self.embedding_symbolic.jacobian(zb), (self.dim, self.n))

    @cached_property
    def normal_fn(self):
        return _lambdify_array(self.coords[1:], self.normal_symbolic, (self.dim,))

    @cached_property
    def normal_jacobian_fn(self):
        zb = self.coords[1:]
        return _lambdify_array(zb, self.normal_symbolic.jacobian(zb), (self.dim, self.n))

    @cached_property
    def induced_metric_fn(self):
        return _lambdify_array(self.coords[1:], self.induced_metric_symbolic, (self.n, self.n))

    @cached_property
    def induced_christoffel_symbolic(self):
        return _christoffel(self.induced_metric_symbolic, self.coords[1:])

    @cached_property
    def induced_christoffel_fn(self):
        return _lambdify_array(self.coords[1:], self.induced_christoffel_symbolic, (self.n,) * 3)

    @cached_property
    def induced_christoffel_derivative_fn(self):
        zb = self.coords[1:]
        G = self.induced_christoffel_symbolic
        k = self.n
        d = [[[[sp.diff(G[a][b][c], zb[e]) for e in range(k)] for c in range(k)] for b in range(k)] for a in range(k)]
        return _lambdify_array(zb, d, (k,) * 4)

    # helpers ----------------------------------------------------------
    def boundary_point(self, zb) -> np.ndarray:
        zb = np.atleast_1d(np.asarray(zb, dtype=float))
        return np.r_[self.boundary_fn(*zb), zb]

    def in_patch(self, z, slack: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.bounds[:, 0] - slack) and np.all(z <= self.bounds[:, 1] + slack))

    def check_metric(self, samples: int = 20, seed: int = 0) -> float:
        """Smallest metric eigenvalue over random patch points (must be > 0)."""
        rng = np.random.default_rng(seed)
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        worst = math.inf
        for _ in range(samples):
            z = lo + (hi - lo) * rng.random(self.dim)
            G = self.metric_fn(*z)
            if not np.allclose(G, G.T, atol=1e-14):
                raise ValueError("metric is not symmetric")
            worst = min(worst, float(np.linalg.eigvalsh(G).min()))
        return worst

    def to_config(self) -> dict:
        return dict(self.description)


def _christoffel(G, coords):
    m = len(coords)
    Ginv = G.inv()
    dG = [[[sp.diff(G[a, b], coords[c]) for c in range(m)] for b in range(m)] for a in range(m)]
    out = []
    for a in range(m):
        rows = []
        for b in range(m):
            row = []
            for c in range(m):
                s = sum(Ginv[a, e] * (dG[e][b][c] + dG[e][c][b] - dG[b][c][e]) for e in range(m)) / 2
                row.append(sp.simplify(s) if G.is_diagonal() else sp.expand(s))
            rows.append(row)
        out.append(rows)
    return out


def _parse_expr(text, n: int):
    zs = _symbols(n)
    names = {f"z{i}": zs[i] for i in range(n + 1)}
    # x1..xn are accepted as aliases for the tangential coordinates
    names.update({f"x{i}": zs[i] for i in range(1, n + 1)})
    try:
        return sp.sympify(text, locals=names) if isinstance(text, str) else sp.sympify(text)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse expression {text!r}") from exc


def _default_bounds(n: int, half_width: float) -> np.ndarray:
    return np.array([[-half_width, half_width]] * (n + 1), dtype=float)


def EuclideanEpigraph(h, n: int = 1, half_width: float = 2.0, name: str = "epigraph") -> ManifoldModel:
    """Flat ``R^{n+1}`` above the graph ``x0 = h(x1..xn)``.

    ``h`` is a sympy expression or a string in ``x1..xn`` (or ``z1..zn``).
    """
    expr = _parse_expr(h, n)
    free = {str(s) for s in expr.free_symbols}
    allowed = {f"z{i}" for i in range(1, n + 1)}
    if not free <= allowed:
        raise ConfigError(f"h may only depend on the tangential coordinates, got {sorted(free)}")
    desc = {"variant": "epigraph", "n": n, "h": str(expr), "half_width": half_width}
    return ManifoldModel(n, sp.eye(n + 1), expr, _default_bounds(n, half_width), name, desc)


def AnalyticMetricPatch(metric, n: int, boundary=0, bounds=None, name: str = "patch", description=None) -> ManifoldModel:
    """Patch with an explicit analytic metric (rows of expressions in ``z0..zn``)."""
    G = sp.Matrix([[_parse_expr(e, n) for e in row] for row in metric])
    if G.shape != (n + 1, n + 1):
        raise ConfigError("metric must be (n+1) x (n+1)")
    if G != G.T:
        raise ConfigError("metric must be symmetric")
    b = _parse_expr(boundary, n)
    bnds = _default_bounds(n, 1.0) if bounds is None else np.asarray(bounds, dtype=float)
    desc = description or {"variant": "patch", "n": n, "metric": [[str(e) for e in row] for row in G.tolist()], "boundary": str(b)}
    return ManifoldModel(n, G, b, bnds, name, desc)


def half_space(n: int = 1) -> ManifoldModel:
    return EuclideanEpigraph(sp.Integer(0), n, name="half_space")


def sphere_cap(latitude: float = 0.5, n: int = 1) -> ManifoldModel:
    """Unit round sphere above the latitude ``latitude`` (radians).

    ``z0`` is the latitude offset from the boundary circle and ``z1`` the
    longitude (``n = 1``); for ``n = 2`` the round 3-sphere in Hopf-type
    coordinates ``dz0^2 + cos^2(a+z0) dz1^2 + cos^2(a+z0) cos^2 z1 dz2^2``.
    The boundary is ``z0 = 0`` with constant geodesic curvature ``tan a``.
    """
    zs = _symbols(n)
    a = sp.nsimplify(latitude) if isinstance(latitude, str) else sp.Float(latitude, 30)
    c = sp.cos(a + zs[0])
    if n == 1:
        G = sp.diag(1, c**2)
    elif n == 2:
        G = sp.diag(1, c**2, c**2 * sp.cos(zs[1]) ** 2)
    else:
        raise ConfigError("sphere_cap is provided for n = 1, 2")
    half = min(0.9, math.pi / 2 - abs(latitude) - 0.1)
    bounds = _default_bounds(n, half)
    desc = {"variant": "patch", "family": "sphere_cap", "n": n, "latitude": latitude}
    return ManifoldModel(n, G, sp.Integer(0), bounds, "sphere_cap", desc)


_FAMILIES = {"sphere_cap": sphere_cap, "half_space": half_space}

_MODEL_KEYS = {
    "epigraph": {"variant", "n", "h", "half_width", "name"},
    "patch": {"variant", "n", "metric", "boundary", "bounds", "family", "latitude", "name"},
}


def model_from_config(cfg: dict) -> ManifoldModel:
    """Build a model from a JSON-style dictionary; unknown keys are rejected."""
    if not isinstance(cfg, dict) or "variant" not in cfg:
        raise ConfigError("model config needs a 'variant' key")
    variant = cfg["variant"]
    if variant not in _MODEL_KEYS:
        raise ConfigError(f"unknown model variant {variant!r}")
    extra = set(cfg) - _MODEL_KEYS[variant]
    if extra:
        raise ConfigError(f"unknown model keys {sorted(extra)}")
    n = int(cfg.get("n", 1))
    if variant == "epigraph":
        if "h" not in cfg:
            raise ConfigError("epigraph model needs 'h'")
        return EuclideanEpigraph(cfg["h"], n, float(cfg.get("half_width", 2.0)), cfg.get("name", "epigraph"))
    if "family" in cfg:
        fam = cfg["family"]
        if fam not in _FAMILIES:
            raise ConfigError(f"unknown family {fam!r}")
        if fam == "sphere_cap":
            return sphere_cap(float(cfg.get("latitude", 0.5)), n)
        return _FAMILIES[fam](n)
    if "metric" not in cfg:
        raise ConfigError("patch model needs 'metric' or 'family'")
    return AnalyticMetricPatch(cfg["metric"], n, cfg.get("boundary", 0), cfg.get("bounds"), cfg.get("name", "patch"))


def load_model(path) -> ManifoldModel:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}") from exc
    return model_from_config(cfg)
