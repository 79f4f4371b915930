"""Special functions and the exact half-ball eigenpair.

The first mixed eigenpair of the unit half-ball ``B_1^+`` in ``R^d`` is the
restriction of the first Dirichlet eigenpair of the unit ball,

    phi_1(r) = c * r^(1 - d/2) * J_{d/2-1}(k r),    lambda_1 = k^2,

with ``k = j_{d/2-1,1}``.  The constant ``c`` makes ``phi_1`` positive with
unit L2 norm on the half-ball (so the whole-ball extension has squared norm 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

__all__ = [
    "RadialEigenfunction",
    "QuadratureRule",
    "bessel_j",
    "first_bessel_zero",
    "radial_eigenfunction",
    "hemisphere_area",
    "half_ball_volume",
    "hemisphere_moment",
    "quadrature_rule",
    "constant_C",
    "first_order_shift",
    "translation_constant",
    "SUPPORTED_DIMENSIONS",
]

SUPPORTED_DIMENSIONS = tuple(range(2, 9))

# below this argument the entire function r^-mu J_mu(k r) is summed as a series
_SERIES_SWITCH = 2.0


def bessel_j(order, x):
    """Bessel function of the first kind ``J_order(x)`` for ``x >= 0``.

    Vectorised over ``x``.  Raises ``ValueError`` for negative arguments
    (the real-order function is complex there).
    """
    x_arr = np.asarray(x, dtype=float)
    if order < 0 or not np.isfinite(order):
        raise ValueError(f"order must be finite and >= 0, got {order!r}")
    if np.any(~np.isfinite(x_arr)):
        raise ValueError("x must be finite")
    if np.any(x_arr < 0):
        raise ValueError("bessel_j is defined here for x >= 0 only")
    out = special.jv(order, x_arr)
    return float(out) if out.ndim == 0 else out


def first_bessel_zero(order: float) -> float:
    """Smallest positive zero ``j_{order,1}`` of ``J_order``.

    The zero is bracketed by marching from ``x = order`` (where ``J`` is still
    positive) in steps of 0.1, then bisected to 1e-13 absolute.
    """
    if not 0 <= order <= 20:
        raise ValueError(f"order must lie in [0, 20], got {order!r}")
    lo = max(order, 1e-3)
    step = 0.1
    f_lo = special.jv(order, lo)
    hi = lo + step
    while special.jv(order, hi) * f_lo > 0:
        lo, hi = hi, hi + step
    return float(optimize.bisect(lambda t: special.jv(order, t), lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))


def _scaled_bessel(mu: float, k: float, r):
    """``r^-mu J_mu(k r)``, an entire function of ``r``; series near the origin."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = k * r <= _SERIES_SWITCH
    if np.any(small):
        z = (0.5 * k * r[small]) ** 2
        term = np.full_like(z, (0.5 * k) ** mu / math.gamma(mu + 1.0))
        acc = term.copy()
        for m in range(1, 40):
            term = -term * z / (m * (m + mu))
            acc += term
        out[small] = acc
    big = ~small
    if np.any(big):
        rb = r[big]
        out[big] = special.jv(mu, k * rb) / rb**mu
    return out


def hemisphere_area(n: int) -> float:
    """Area of the upper unit hemisphere ``S^n_+`` (half of ``|S^n|``)."""
    d = n + 1
    return math.pi ** (d / 2) / math.gamma(d / 2)


def half_ball_volume(d: int) -> float:
    return hemisphere_area(d - 1) / d


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor quadrature on ``[0,1]``, on ``S^n_+`` and on ``B_1^+``.

    ``sphere_points`` has shape ``(m, n+1)`` with column 0 the coordinate
    normal to the flat face.  ``degree`` is the polynomial degree integrated
    exactly by the radial and angular factors.
    """

    n: int
    degree: int
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    sphere_points: np.ndarray
    sphere_weights: np.ndarray

    def integrate_sphere(self, values) -> float:
        return float(np.dot(self.sphere_weights, values))

    def integrate_radial(self, values) -> float:
        return float(np.dot(self.radial_weights, values))

    def volume_points(self):
        """Nodes and weights of the product rule on the half-ball."""
        r = self.radial_nodes
        pts = r[:, None, None] * self.sphere_points[None, :, :]
        w = (self.radial_weights * r**self.n)[:, None] * self.sphere_weights[None, :]
        return pts.reshape(-1, self.n + 1), w.ravel()

    def integrate_ball(self, func) -> float:
        pts, w = self.volume_points()
        return float(np.dot(w, func(pts)))


def _gauss_legendre(npts: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


@lru_cache(maxsize=None)
def _cached_rule(n: int, degree: int) -> QuadratureRule:
    npts = degree // 2 + 1
    rn, rw = _gauss_legendre(npts, 0.0, 1.0)
    if n == 1:
        th, wt = _gauss_legendre(npts, 0.0, math.pi)
        pts = np.column_stack([np.sin(th), np.cos(th)])
    elif n == 2:
        # y0 = t in [0,1] (polynomial in the integrand), azimuth by the
        # trapezoid rule, exact for trigonometric degree < nphi
        t, wtt = _gauss_legendre(npts, 0.0, 1.0)
        nphi = degree + 2
        phi = 2 * math.pi * np.arange(nphi) / nphi
        T, P = np.meshgrid(t, phi, indexing="ij")
        S = np.sqrt(1.0 - T**2)
        pts = np.column_stack([T.ravel(), (S * np.cos(P)).ravel(), (S * np.sin(P)).ravel()])
        wt = (wtt[:, None] * np.full(nphi, 2 * math.pi / nphi)[None, :]).ravel()
    else:
        raise NotImplementedError("hemisphere quadrature is provided for n = 1, 2")
    for arr in (rn, rw, pts, wt):
        arr.setflags(write=False)
    return QuadratureRule(n=n, degree=degree, radial_nodes=rn, radial_weights=rw, sphere_points=pts, sphere_weights=wt)


def quadrature_rule(n: int, degree: int = 48) -> QuadratureRule:
    """Product Gauss rule on the hemisphere and half-ball, exact to ``degree``."""
    if degree < 40:
        raise ValueError("quadrature degree must be at least 40")
    return _cached_rule(int(n), int(degree))


@dataclass(frozen=True)
class RadialEigenfunction:
    """First mixed eigenpair of the unit half-ball in dimension ``d``.

    ``phi``, ``dphi`` and ``d2phi`` evaluate the radial profile and its first
    two derivatives on ``[0, 1]``; they are regular at ``r = 0`` for every
    ``d`` (no division by ``r``).
    """

    d: int
    lambda1: float
    k: float
    c: float
    normalization: dict = field(default_factory=dict, compare=False)

    @property
    def nu(self) -> float:
        return self.d / 2 - 1

    @property
    def n(self) -> int:
        return self.d - 1

    def phi(self, r):
        return self.c * _scaled_bessel(self.nu, self.k, r)

    def dphi(self, r):
        r = np.asarray(r, dtype=float)
        return -self.c * self.k * r * _scaled_bessel(self.nu + 1, self.k, r)

    def d2phi(self, r):
        r = np.asarray(r, dtype=float)
        k = self.k
        return -self.c * k * (_scaled_bessel(self.nu + 1, k, r) - k * r**2 * _scaled_bessel(self.nu + 2, k, r))

    @property
    def dphi1(self) -> float:
        """``phi_1'(1)``, the (negative) boundary flux of the half-ball."""
        return float(self.dphi(np.array([1.0]))[0])

    @property
    def d2phi1(self) -> float:
        """``phi_1''(1)`` from the ODE: at ``r=1``, ``phi'' = -(d-1) phi'``."""
        return -(self.d - 1) * self.dphi1

    def residual(self, r):
        """Pointwise ``phi'' + (d-1)/r phi' + lambda phi`` (for ``r > 0``)."""
        r = np.asarray(r, dtype=float)
        return self.d2phi(r) + (self.d - 1) / r * self.dphi(r) + self.lambda1 * self.phi(r)


@lru_cache(maxsize=None)
def radial_eigenfunction(d: int) -> RadialEigenfunction:
    if d not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"dimension d must lie in {SUPPORTED_DIMENSIONS}, got {d!r}")
    nu = d / 2 - 1
    k = first_bessel_zero(nu)
    area = hemisphere_area(d - 1)
    # int_0^1 J_nu(k r)^2 r dr = J_{nu+1}(k)^2 / 2 at a zero of J_nu
    c = math.sqrt(2.0 / area) / abs(float(special.jv(nu + 1, k)))
    eig = RadialEigenfunction(d=d, lambda1=k * k, k=k, c=c)
    l2 = area * _radial_integral(d, lambda r: eig.phi(r) ** 2 * r ** (d - 1))
    eig.normalization.update({"half_ball_l2_squared": l2, "whole_ball_l2_squared": 2 * l2, "c": c})
    return eig


def hemisphere_moment(exponents) -> float:
    """``int_{S^n_+} prod_i (y^i)^{m_i} dsigma`` for nonnegative integer exponents.

    ``exponents[0]`` belongs to the coordinate normal to the equator.  Any odd
    exponent on a tangential coordinate gives zero; otherwise the value is
    ``prod Gamma((m_i+1)/2) / Gamma(sum (m_i+1)/2)``.
    """
    m = [int(e) for e in exponents]
    if any(e < 0 for e in m):
        raise ValueError("exponents must be nonnegative")
    if len(m) < 2:
        raise ValueError("need at least two coordinates (n >= 1)")
    if any(e % 2 for e in m[1:]):
        return 0.0
    a = [(e + 1) / 2 for e in m]
    log_val = sum(math.lgamma(ai) for ai in a) - math.lgamma(sum(a))
    return math.exp(log_val)


def _radial_integral(d: int, func, degree: int = 128) -> float:
    rule = quadrature_rule(1, degree)
    return rule.integrate_radial(func(rule.radial_nodes))


def constant_C(d: int) -> float:
    """``C = -2 (int_{S^n_+} y0 (y1)^2) (1/phi_1'(1)) int_{B_1^+} r |phi_1'|^2``."""
    eig = radial_eigenfunction(d)
    n = d - 1
    moment = hemisphere_moment([1, 2] + [0] * (n - 1))
    ball = hemisphere_area(n) * _radial_integral(d, lambda r: r * eig.dphi(r) ** 2 * r**n)
    return -2.0 * moment * ball / eig.dphi1


def first_order_shift(d: int) -> float:
    """``c1`` in ``lambda_bar = lambda_1 + eps * c1 * H + O(eps^2)``.

    First variation of the volume-normalised eigenvalue of the Fermi half-ball
    under the metric ``delta_ij + 2 eps h_ij y0`` (``H = -tr h``): the metric
    perturbation of the Rayleigh quotient plus the radial rescaling that
    restores the volume.
    """
    eig = radial_eigenfunction(d)
    n = d - 1
    lam = eig.lambda1
    m_y0y1 = hemisphere_moment([1, 2] + [0] * (n - 1))
    m_y0 = hemisphere_moment([1] + [0] * n)
    i1 = _radial_integral(d, lambda r: eig.dphi(r) ** 2 * r ** (n + 1))
    i2 = _radial_integral(d, lambda r: eig.phi(r) ** 2 * r ** (n + 1))
    vol = half_ball_volume(d)
    return 2 * m_y0y1 * i1 - m_y0 * (i1 - lam * i2) - 2 * lam * m_y0 / ((n + 1) * (n + 2) * vol)


def translation_constant(d: int) -> float:
    """Kernel-projection coefficient predicted by sliding the domain along the wall.

    Differentiating ``lambda_bar(p)`` along the wall with the boundary
    variation formula gives ``int F <b,.> = -eps^2 c1 dH/(2 phi_1'(1))``.
    """
    eig = radial_eigenfunction(d)
    return -first_order_shift(d) / (2.0 * eig.dphi1)
