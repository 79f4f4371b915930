"""Harmonic analysis on the upper hemisphere and the linearized operator L0.

Functions on ``S^n_+`` with zero normal derivative along the equator are
expanded in spherical harmonics that are even in ``y0`` (the coordinate normal
to the flat face).  On each degree the operator

    L0 v = d_r psi + phi_1''(1) v,   (Delta + lambda_1) psi = 0 in B_1^+,
                                      psi = -phi_1'(1) v on S^n_+,

acts as multiplication by ``mu_l``; ``mu_1 = 0`` and the degree-one modes are
the wall-parallel linear functions ``y -> <a, y>`` with ``a0 = 0``.

Points are arrays of shape ``(m, n+1)``.  For ``n = 1`` a point is
``(sin t, cos t)`` with ``t`` in ``[0, pi]`` and the basis is ``cos(l t)``.
For ``n = 2`` the polar axis is ``y0`` and the modes are real harmonics
``(l, m)`` with ``l + |m|`` even.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .analytic_core import RadialEigenfunction, _scaled_bessel, hemisphere_area, quadrature_rule

__all__ = [
    "HarmonicMode",
    "HemisphereFunction",
    "WholeSphereFunction",
    "RadialProfile",
    "TruncationWarning",
    "admissible_modes",
    "basis_matrix",
    "symmetrize",
    "restrict",
    "interior_extension",
    "l0_eigenvalue",
    "l0_eigenvalues",
    "apply_L0",
    "solve_L0",
    "kernel_projection",
    "kernel_basis",
    "whole_sphere_L0",
    "mode_table",
    "mode_table_csv",
]

DEFAULT_LMAX = 16


class TruncationWarning(UserWarning):
    """Input carries non-negligible energy in the highest retained degree."""


@dataclass(frozen=True, order=True)
class HarmonicMode:
    """Spherical harmonic label.

    ``index`` is 0 for ``n = 1``; for ``n = 2`` it is the signed order ``m``
    (cosine for ``m >= 0``, sine for ``m < 0``).
    """

    degree: int
    index: int = 0
    even_in_y0: bool = True


def _check_n(n: int) -> None:
    if n not in (1, 2):
        raise ValueError(f"hemisphere harmonics are implemented for n = 1, 2 (got n={n})")


@lru_cache(maxsize=None)
def admissible_modes(n: int, lmax: int) -> tuple[HarmonicMode, ...]:
    """Modes even in ``y0`` up to degree ``lmax``, ordered by degree."""
    _check_n(n)
    if lmax < 1:
        raise ValueError("lmax must be at least 1")
    if n == 1:
        return tuple(HarmonicMode(l, 0) for l in range(lmax + 1))
    out = []
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            if (l + abs(m)) % 2 == 0:
                out.append(HarmonicMode(l, m))
    return tuple(out)


@lru_cache(maxsize=None)
def _whole_modes(n: int, lmax: int) -> tuple[HarmonicMode, ...]:
    _check_n(n)
    if n == 1:
        # index 0 -> cos(l t), index -1 -> sin(l t)
        out = [HarmonicMode(0, 0)]
        for l in range(1, lmax + 1):
            out += [HarmonicMode(l, 0), HarmonicMode(l, -1, False)]
        return tuple(out)
    return tuple(HarmonicMode(l, m, (l + abs(m)) % 2 == 0) for l in range(lmax + 1) for m in range(-l, l + 1))


def _angles(points: np.ndarray, n: int):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != n + 1:
        raise ValueError(f"points must have {n + 1} columns")
    if n == 1:
        return (np.arctan2(points[:, 0], points[:, 1]),)
    t = np.clip(points[:, 0], -1.0, 1.0)
    beta = np.arctan2(points[:, 2], points[:, 1])
    return t, beta


def _eval_modes(modes, n: int, points: np.ndarray, scale: float) -> np.ndarray:
    """Columns are the modes, orthonormal on the sphere times ``scale``."""
    ang = _angles(points, n)
    out = np.empty((ang[0].shape[0], len(modes)))
    if n == 1:
        theta = ang[0]
        for j, md in enumerate(modes):
            if md.degree == 0:
                out[:, j] = 1.0 / math.sqrt(2 * math.pi)
            elif md.index == 0:
                out[:, j] = np.cos(md.degree * theta) / math.sqrt(math.pi)
            else:
                out[:, j] = np.sin(md.degree * theta) / math.sqrt(math.pi)
        return out * scale
    t, beta = ang
    for j, md in enumerate(modes):
        l, m = md.degree, abs(md.index)
        norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1)))
        # drop the Condon-Shortley phase so that mode (1, 1) is +y1
        leg = (-1) ** m * special.lpmv(m, l, t)
        if md.index == 0:
            out[:, j] = norm * leg
        elif md.index > 0:
            out[:, j] = math.sqrt(2) * norm * leg * np.cos(m * beta)
        else:
            out[:, j] = math.sqrt(2) * norm * leg * np.sin(m * beta)
    return out * scale


def basis_matrix(n: int, lmax: int, points) -> np.ndarray:
    """Values of the hemisphere-orthonormal admissible basis at ``points``."""
    # even harmonics carry half their squared mass on each hemisphere
    return _eval_modes(admissible_modes(n, lmax), n, points, math.sqrt(2.0))


def _projection_rule(n: int, lmax: int):
    return quadrature_rule(n, max(128, 8 * lmax))


@dataclass(frozen=True)
class HemisphereFunction:
    """Truncated expansion on ``S^n_+`` in the admissible orthonormal basis.

    Attributes
    ----------
    n : int
        Hemisphere dimension (1 or 2).
    lmax : int
        Truncation degree.
    coeffs : ndarray
        Coefficients, ordered as :func:`admissible_modes`.
    """

    n: int
    lmax: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (len(admissible_modes(self.n, self.lmax)),):
            raise ValueError("coefficient vector does not match the mode list")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, n: int, lmax: int = DEFAULT_LMAX) -> "HemisphereFunction":
        return cls(n, lmax, np.zeros(len(admissible_modes(n, lmax))))

    @classmethod
    def mode(cls, n: int, lmax: int, mode: HarmonicMode, amplitude: float = 1.0) -> "HemisphereFunction":
        modes = admissible_modes(n, lmax)
        c = np.zeros(len(modes))
        c[modes.index(mode)] = amplitude
        return cls(n, lmax, c)

    @classmethod
    def from_function(cls, n: int, lmax: int, func) -> "HemisphereFunction":
        """L2 projection of ``func(points)`` by hemisphere quadrature."""
        rule = _projection_rule(n, lmax)
        pts, w = rule.sphere_points, rule.sphere_weights
        B = basis_matrix(n, lmax, pts)
        return cls(n, lmax, B.T @ (w * np.asarray(func(pts), dtype=float)))

    @classmethod
    def linear(cls, a, lmax: int = DEFAULT_LMAX) -> "HemisphereFunction":
        """``y -> <a, y>`` for a tangential vector ``a`` (``a0`` must be 0)."""
        a = np.asarray(a, dtype=float)
        n = a.size - 1
        if abs(a[0]) > 0:
            raise ValueError("only wall-parallel linear functions are admissible (a0 = 0)")
        out = np.zeros(len(admissible_modes(n, lmax)))
        for vec, b in zip(kernel_basis(n, lmax), a[1:]):
            out += b * vec.coeffs * _linear_scale(n)
        return cls(n, lmax, out)

    @property
    def modes(self) -> tuple[HarmonicMode, ...]:
        return admissible_modes(self.n, self.lmax)

    def degrees(self) -> np.ndarray:
        return np.array([m.degree for m in self.modes])

    def __call__(self, points) -> np.ndarray:
        return basis_matrix(self.n, self.lmax, points) @ self.coeffs

    def __add__(self, other: "HemisphereFunction") -> "HemisphereFunction":
        self._check_compatible(other)
        return HemisphereFunction(self.n, self.lmax, self.coeffs + other.coeffs)

    def __sub__(self, other: "HemisphereFunction") -> "HemisphereFunction":
        self._check_compatible(other)
        return HemisphereFunction(self.n, self.lmax, self.coeffs - other.coeffs)

    def __mul__(self, s: float) -> "HemisphereFunction":
        return HemisphereFunction(self.n, self.lmax, float(s) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "HemisphereFunction":
        return self * -1.0

    def _check_compatible(self, other) -> None:
        if (self.n, self.lmax) != (other.n, other.lmax):
            raise ValueError("incompatible hemisphere functions")

    def inner(self, other: "HemisphereFunction") -> float:
        self._check_compatible(other)
        return float(self.coeffs @ other.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @property
    def mean(self) -> float:
        """Average over ``S^n_+``."""
        return float(self.coeffs[0] / math.sqrt(hemisphere_area(self.n)))

    def without_mean(self) -> "HemisphereFunction":
        c = self.coeffs.copy()
        c[0] = 0.0
        return HemisphereFunction(self.n, self.lmax, c)

    def degree_energy(self) -> np.ndarray:
        deg = self.degrees()
        return np.bincount(deg, weights=self.coeffs**2, minlength=self.lmax + 1)

    def resized(self, lmax: int) -> "HemisphereFunction":
        old = {m: c for m, c in zip(self.modes, self.coeffs)}
        new = admissible_modes(self.n, lmax)
        return HemisphereFunction(self.n, lmax, np.array([old.get(m, 0.0) for m in new]))


def _linear_scale(n: int) -> float:
    # <e_1, y1> where e_1 is the normalised degree-one mode along y1
    return math.sqrt(hemisphere_area(n) / (n + 1))


@lru_cache(maxsize=None)
def kernel_basis(n: int, lmax: int = DEFAULT_LMAX) -> tuple[HemisphereFunction, ...]:
    """Orthonormal basis of K: the normalised modes ``y1, ..., yn``."""
    modes = admissible_modes(n, lmax)
    if n == 1:
        labels = [HarmonicMode(1, 0)]
    else:
        labels = [HarmonicMode(1, 1), HarmonicMode(1, -1)]
    out = []
    for lab in labels:
        c = np.zeros(len(modes))
        c[modes.index(lab)] = 1.0
        out.append(HemisphereFunction(n, lmax, c))
    return tuple(out)


@dataclass(frozen=True)
class WholeSphereFunction:
    """Truncated expansion on all of ``S^n`` (both parities in ``y0``)."""

    n: int
    lmax: int
    coeffs: np.ndarray

    @property
    def modes(self) -> tuple[HarmonicMode, ...]:
        return _whole_modes(self.n, self.lmax)

    def __call__(self, points) -> np.ndarray:
        return _eval_modes(self.modes, self.n, points, 1.0) @ self.coeffs

    @property
    def mean(self) -> float:
        return float(self.coeffs[0] / math.sqrt(2 * hemisphere_area(self.n)))


def symmetrize(f: HemisphereFunction) -> WholeSphereFunction:
    """Even extension across the equator, ``w(-y0, y') = w(y0, y')``."""
    whole = _whole_modes(f.n, f.lmax)
    pos = {m: i for i, m in enumerate(whole)}
    c = np.zeros(len(whole))
    # hemisphere basis is sqrt(2) times the sphere-orthonormal harmonic
    for m, v in zip(f.modes, f.coeffs):
        c[pos[m]] = math.sqrt(2.0) * v
    return WholeSphereFunction(f.n, f.lmax, c)


def restrict(w, n: int | None = None, lmax: int | None = None) -> HemisphereFunction:
    """Restriction to ``S^n_+`` projected on the admissible basis.

    ``w`` is a :class:`WholeSphereFunction` or any callable on sphere points
    (then ``n`` and ``lmax`` are required and the projection uses quadrature).
    Only the even part survives; on whole-sphere coefficients the map is read
    off exactly, so it inverts :func:`symmetrize`.
    """
    if isinstance(w, WholeSphereFunction):
        pos = {m: i for i, m in enumerate(w.modes)}
        c = [w.coeffs[pos[m]] / math.sqrt(2.0) for m in admissible_modes(w.n, w.lmax)]
        return HemisphereFunction(w.n, w.lmax, np.array(c))
    if n is None or lmax is None:
        raise ValueError("n and lmax are required for a callable")
    return HemisphereFunction.from_function(n, lmax, w)


@dataclass(frozen=True)
class RadialProfile:
    """Separable Helmholtz profile ``f(r) = kappa * r^l * T(r)`` for degree ``l``."""

    degree: int
    eig: RadialEigenfunction
    kappa: float

    @property
    def order(self) -> float:
        return self.degree + self.eig.nu

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.kappa * r**self.degree * _scaled_bessel(self.order, self.eig.k, r)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        l, k, mu = self.degree, self.eig.k, self.order
        head = l * r ** max(l - 1, 0) * _scaled_bessel(mu, k, r) if l > 0 else 0.0
        return self.kappa * (head - k * r ** (l + 1) * _scaled_bessel(mu + 1, k, r))

    def second_derivative(self, r):
        """From the mode ODE ``f'' + (d-1)/r f' + (lambda_1 - l(l+d-2)/r^2) f = 0``."""
        r = np.asarray(r, dtype=float)
        d, l = self.eig.d, self.degree
        return -(d - 1) / r * self.derivative(r) - (self.eig.lambda1 - l * (l + d - 2) / r**2) * self(r)


def interior_extension(mode, eig: RadialEigenfunction) -> RadialProfile:
    """Radial profile of the Helmholtz extension of a degree-``l`` mode.

    Scaled so that ``f_l(1) = -phi_1'(1)``; the extension of ``v`` is then
    ``f_l(r) v(y/|y|)``, matching the boundary data ``-phi_1'(1) v``.
    """
    l = mode.degree if isinstance(mode, HarmonicMode) else int(mode)
    if l < 1:
        raise ValueError("degree must be >= 1 (the constant mode is excluded)")
    val = float(_scaled_bessel(l + eig.nu, eig.k, np.array([1.0]))[0])
    if val == 0.0:
        raise ZeroDivisionError("singular scaling: J_{l+nu}(k) vanishes")
    return RadialProfile(l, eig, -eig.dphi1 / val)


def l0_eigenvalue(l: int, eig: RadialEigenfunction) -> float:
    """``mu_l = f_l'(1) + phi_1''(1)``, the action of L0 on degree ``l``."""
    if l < 1:
        raise ValueError("degree must be >= 1")
    prof = interior_extension(l, eig)
    return float(prof.derivative(np.array([1.0]))[0]) + eig.d2phi1


def l0_eigenvalues(eig: RadialEigenfunction, lmax: int) -> np.ndarray:
    """``mu_l`` for ``l = 0..lmax`` with ``mu_0`` set to NaN (not defined)."""
    out = np.full(lmax + 1, np.nan)
    for l in range(1, lmax + 1):
        out[l] = l0_eigenvalue(l, eig)
    return out


def _check_eig(f, eig: RadialEigenfunction) -> None:
    if eig.d != f.n + 1:
        raise ValueError(f"eigenpair dimension {eig.d} does not match hemisphere S^{f.n}")


def apply_L0(v: HemisphereFunction, eig: RadialEigenfunction, *, mean_tol: float = 1e-12) -> HemisphereFunction:
    """Diagonal action of L0 on a zero-mean hemisphere function."""
    _check_eig(v, eig)
    if abs(v.coeffs[0]) > mean_tol * max(1.0, v.norm()):
        raise ValueError("L0 acts on zero-mean functions")
    total = v.norm() ** 2
    if total > 0 and v.degree_energy()[-1] > 1e-8 * total:
        warnings.warn("energy at the truncation degree exceeds 1e-8 of the norm", TruncationWarning, stacklevel=2)
    mu = l0_eigenvalues(eig, v.lmax)
    mu[0] = 0.0
    return HemisphereFunction(v.n, v.lmax, mu[v.degrees()] * v.coeffs)


def kernel_projection(f: HemisphereFunction):
    """Split ``f`` into its degree-one part ``k`` (in K) and the remainder."""
    c = np.where(f.degrees() == 1, f.coeffs, 0.0)
    k = HemisphereFunction(f.n, f.lmax, c)
    return k, f - k


def solve_L0(f: HemisphereFunction, eig: RadialEigenfunction, *, tol: float = 1e-12) -> HemisphereFunction:
    """Solve ``L0 w = f`` for ``f`` zero-mean and orthogonal to K; ``w`` in K-perp."""
    _check_eig(f, eig)
    scale = max(1.0, f.norm())
    deg = f.degrees()
    if abs(f.coeffs[0]) > tol * scale or np.any(np.abs(f.coeffs[deg == 1]) > tol * scale):
        raise ValueError("right-hand side must be zero-mean and orthogonal to the kernel")
    mu = l0_eigenvalues(eig, f.lmax)
    c = np.zeros_like(f.coeffs)
    sel = deg >= 2
    c[sel] = f.coeffs[sel] / mu[deg[sel]]
    return HemisphereFunction(f.n, f.lmax, c)


def whole_sphere_L0(w: WholeSphereFunction, eig: RadialEigenfunction) -> WholeSphereFunction:
    """The operator on all of ``S^n`` built from the full-ball Helmholtz problem.

    Each whole-sphere harmonic of degree ``l >= 1`` is extended by the same
    separable profile; the result is evaluated by finite differences of the
    profile in ``r`` (not by the closed-form ``mu_l``), so it is an independent
    route to the hemisphere operator.
    """
    if eig.d != w.n + 1:
        raise ValueError("dimension mismatch")
    c = np.zeros_like(w.coeffs)
    h = 1e-4
    for j, md in enumerate(w.modes):
        if md.degree == 0 or w.coeffs[j] == 0:
            continue
        prof = interior_extension(md.degree, eig)
        r = 1.0 + h * np.array([-2.0, -1.0, 1.0, 2.0])
        fr = prof(r)
        # fourth-order central difference (the profile is entire in r)
        dfr = (fr[0] - 8 * fr[1] + 8 * fr[2] - fr[3]) / (12 * h)
        c[j] = (dfr + eig.d2phi1) * w.coeffs[j]
    return WholeSphereFunction(w.n, w.lmax, c)


def mode_table(eig: RadialEigenfunction, lmax: int) -> list[dict]:
    """Rows ``{l, mu_l, multiplicity}`` for ``l = 1..lmax``."""
    n = eig.d - 1
    rows = []
    for l in range(1, lmax + 1):
        mult = 1 if n == 1 else l + 1
        rows.append({"l": l, "mu": l0_eigenvalue(l, eig), "multiplicity": mult})
    return rows


def mode_table_csv(eig: RadialEigenfunction, lmax: int) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["d", "l", "mu", "multiplicity"])
    for row in mode_table(eig, lmax):
        wr.writerow([eig.d, row["l"], f"{row['mu']:.15e}", row["multiplicity"]])
    return buf.getvalue()
