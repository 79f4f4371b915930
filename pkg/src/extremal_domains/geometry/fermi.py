"""Fermi charts at a boundary point.

``Psi(x0, x') = exp_Q(x0 N(Q))`` with ``Q = exp^{dM}_p(sum x^i E_i)``: first
a geodesic of the boundary with initial velocity ``x'`` in an orthonormal
frame, then the normal geodesic of length ``x0``.  Both legs integrate the
geodesic equations together with their variational equations, so the
Jacobian ``dPsi`` (and hence the pulled-back metric) is obtained to ODE
tolerance rather than by differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .models import ManifoldModel

__all__ = ["ChartError", "FermiChart", "fermi_chart", "geodesic", "CurveFermiMetric"]

RTOL = 1e-12
ATOL = 1e-13


class ChartError(RuntimeError):
    """Geodesic integration left the model's coordinate patch."""


def _geodesic_rhs(christoffel, dchristoffel, m, k):
    """Geodesic flow with ``k`` variational directions in dimension ``m``."""

    def rhs(_t, y):
        z = y[:m]
        w = y[m : 2 * m]
        Gam = christoffel(*z)
        acc = -np.einsum("abc,b,c->a", Gam, w, w)
        if k == 0:
            return np.r_[w, acc]
        Z = y[2 * m : 2 * m + m * k].reshape(m, k)
        W = y[2 * m + m * k :].reshape(m, k)
        dGam = dchristoffel(*z)
        dW = -np.einsum("abce,ep,b,c->ap", dGam, Z, w, w) - 2 * np.einsum("abc,b,cp->ap", Gam, w, W)
        return np.r_[w, acc, W.ravel(), dW.ravel()]

    return rhs


def _integrate(rhs, y0, t_end, check, label):
    if t_end == 0.0:
        return y0
    sol = integrate.solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=RTOL, atol=ATOL)
    if not sol.success:
        raise ChartError(f"{label} geodesic integration failed: {sol.message}")
    for col in sol.y.T:
        check(col)
    return sol.y[:, -1]


def geodesic(model: ManifoldModel, z, v, t: float) -> np.ndarray:
    """Ambient geodesic from ``z`` with velocity ``v`` evaluated at time ``t``."""
    m = model.dim
    rhs = _geodesic_rhs(model.christoffel_fn, None, m, 0)

    def check(col):
        if not model.in_patch(col[:m]):
            raise ChartError("geodesic left the coordinate patch")

    y = _integrate(rhs, np.r_[np.asarray(z, float), np.asarray(v, float)], float(t), check, "ambient")
    return y[:m]


def _orthonormal_frame(gamma: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on the coordinate basis; columns are ``E_i`` in ``z'``."""
    n = gamma.shape[0]
    E = np.zeros((n, n))
    for i in range(n):
        v = np.eye(n)[:, i]
        for j in range(i):
            v = v - (E[:, j] @ gamma @ v) * E[:, j]
        E[:, i] = v / math.sqrt(v @ gamma @ v)
    return E


@dataclass(frozen=True, eq=False)
class FermiChart:
    """Fermi chart of ``model`` at the boundary point with tangential coordinates ``p``.

    Attributes
    ----------
    frame : ndarray
        ``(n, n)``; column ``i`` is ``E_i`` in boundary coordinates.
    valid_radius : float
        Radius within which evaluations are accepted.
    """

    model: ManifoldModel
    p: np.ndarray
    frame: np.ndarray
    valid_radius: float

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def base_point(self) -> np.ndarray:
        return self.model.boundary_point(self.p)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n + 1,):
            raise ValueError(f"chart points have {self.n + 1} components")
        if x[0] < -1e-14 or np.linalg.norm(x) > self.valid_radius * (1 + 1e-12):
            raise ChartError(f"point {x} outside the chart (radius {self.valid_radius})")
        return x

    def boundary_exp(self, xb):
        """``q = exp_p(sum x^i E_i)`` in boundary coordinates and ``dq/dx'``."""
        model, n = self.model, self.n
        xb = np.asarray(xb, dtype=float)
        v0 = self.frame @ xb
        y0 = np.r_[self.p, v0, np.zeros(n * n), self.frame.ravel()]
        rhs = _geodesic_rhs(model.induced_christoffel_fn, model.induced_christoffel_derivative_fn, n, n)

        def check(col):
            zb = col[:n]
            if not model.in_patch(np.r_[model.boundary_fn(*zb), zb]):
                raise ChartError("boundary geodesic left the coordinate patch")

        if np.all(xb == 0):
            return self.p.copy(), self.frame.copy()
        # geodesic with velocity v0 for unit time; variation w.r.t. v0 components
        y = _integrate(rhs, y0, 1.0, check, "boundary")
        return y[:n], y[2 * n : 2 * n + n * n].reshape(n, n)

    def evaluate(self, x):
        """Point ``Psi(x)`` in patch coordinates and the Jacobian ``dPsi``."""
        x = self._check(x)
        model, m, n = self.model, self.model.dim, self.n
        q, dq = self.boundary_exp(x[1:])
        Q = model.boundary_point(q)
        DQ = model.embedding_jacobian_fn(*q) @ dq
        N = model.normal_fn(*q)
        DN = model.normal_jacobian_fn(*q) @ dq
        if model.is_flat_euclidean:
            z = Q + x[0] * N
            J = np.column_stack([N, DQ + x[0] * DN])
            return z, J
        rhs = _geodesic_rhs(model.christoffel_fn, model.christoffel_derivative_fn, m, n)

        def check(col):
            if not model.in_patch(col[:m]):
                raise ChartError("normal geodesic left the coordinate patch")

        y0 = np.r_[Q, N, DQ.ravel(), DN.ravel()]
        y = _integrate(rhs, y0, float(x[0]), check, "normal")
        z = y[:m]
        J = np.column_stack([y[m : 2 * m], y[2 * m : 2 * m + m * n].reshape(m, n)])
        return z, J

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)[0]

    def pullback_metric(self, x) -> np.ndarray:
        z, J = self.evaluate(x)
        return J.T @ self.model.metric_fn(*z) @ J

    def pullback_metrics(self, points) -> np.ndarray:
        return np.array([self.pullback_metric(x) for x in np.atleast_2d(points)])


def fermi_chart(model: ManifoldModel, p, valid_radius: float = 0.5) -> FermiChart:
    """Fermi chart at the boundary point with tangential coordinates ``p``.

    ``valid_radius`` is a user bound below the injectivity scale.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape != (model.n,):
        raise ValueError(f"p needs {model.n} tangential coordinates")
    if not model.in_patch(model.boundary_point(p)):
        raise ChartError("base point outside the model patch")
    gamma = model.induced_metric_fn(*p)
    return FermiChart(model, p, _orthonormal_frame(gamma), float(valid_radius))


class CurveFermiMetric:
    """Closed-form Fermi metric of a planar wall curve ``x0 = h(x1)`` (n = 1).

    In Fermi coordinates ``(x0, s)`` with ``s`` the arclength from ``x1 = 0``
    the Euclidean metric is ``dx0^2 + (1 - kappa(s) x0)^2 ds^2`` with
    ``kappa = h''/(1+h'^2)^{3/2}`` the curvature toward the manifold side.
    """

    def __init__(self, model: ManifoldModel, s_range: float = 1.5):
        if model.n != 1 or not model.is_flat_euclidean:
            raise ValueError("CurveFermiMetric needs a planar Euclidean epigraph (n = 1)")
        import sympy as sp

        t = model.coords[1]
        h = model.boundary
        self.model = model
        self._dh = sp.lambdify(t, sp.diff(h, t), "numpy")
        kappa = sp.diff(h, t, 2) / (1 + sp.diff(h, t) ** 2) ** sp.Rational(3, 2)
        self._kappa_t = sp.lambdify(t, kappa, "numpy")
        self._dkappa_t = sp.lambdify(t, sp.diff(kappa, t), "numpy")
        self._d2kappa_t = sp.lambdify(t, sp.diff(kappa, t, 2), "numpy")
        self.s_range = s_range

    def arclength(self, t: float) -> float:
        val, _ = integrate.quad(lambda u: math.sqrt(1 + float(self._dh(u)) ** 2), 0.0, t, epsabs=1e-14, epsrel=1e-14)
        return val

    def _inverse(self):
        if not hasattr(self, "_branches"):
            rhs = lambda _s, t: [1.0 / math.sqrt(1 + float(self._dh(t[0])) ** 2)]
            self._branches = [
                integrate.solve_ivp(rhs, (0.0, sgn * self.s_range), [0.0], method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
                for sgn in (1.0, -1.0)
            ]
        return self._branches

    def parameter(self, s):
        """Inverse arclength ``t(s)`` from ``dt/ds = 1/sqrt(1 + h'(t)^2)``."""
        s = np.asarray(s, dtype=float)
        if np.any(np.abs(s) > self.s_range):
            raise ValueError("arclength outside the tabulated range")
        fwd, bwd = self._inverse()
        flat = s.ravel()
        out = np.where(flat >= 0, fwd.sol(np.maximum(flat, 0))[0], bwd.sol(np.minimum(flat, 0))[0])
        return out.reshape(s.shape)

    def curvature(self, s):
        return np.asarray(self._kappa_t(self.parameter(s)), dtype=float) * np.ones_like(np.asarray(s, dtype=float))

    def curvature_derivatives(self, s: float):
        """``kappa``, ``dkappa/ds`` and ``d2kappa/ds2`` at arclength ``s``."""
        t = float(self.parameter(np.array(s)))
        w = math.sqrt(1 + float(self._dh(t)) ** 2)
        k1 = float(self._dkappa_t(t)) / w
        # d/ds = (1/w) d/dt, and dw/dt = h' h'' / w
        h1 = float(self._dh(t))
        k = float(self._kappa_t(t))
        h2 = k * w**3
        k2 = (float(self._d2kappa_t(t)) / w - float(self._dkappa_t(t)) * h1 * h2 / w**3) / w
        return k, k1, k2

    def curvature_interpolant(self, s_min: float, s_max: float, nodes: int = 64):
        """Chebyshev interpolant of ``kappa(s)`` on ``[s_min, s_max]``."""
        x = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
        s = 0.5 * (s_max - s_min) * x + 0.5 * (s_max + s_min)
        vals = np.asarray(self._kappa_t(self.parameter(s)), dtype=float) * np.ones_like(s)
        return np.polynomial.Chebyshev.fit(s, vals, nodes - 1, domain=[s_min, s_max])
