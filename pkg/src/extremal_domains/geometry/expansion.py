"""Numerical check of the Fermi metric expansion and two hemisphere identities.

In Fermi coordinates the metric satisfies ``g00 = 1``, ``g0j = 0`` and

    g_ij = delta_ij + 2 h_ij x0 + (R_{0i0j} + (h^2)_ij) (x0)^2
           + 2 R_{k0ij} x^k x0 + (1/3) Rtilde_{ikjl} x^k x^l + O(|x|^3).

:func:`verify_metric_expansion` samples the pulled-back metric on a ladder of
half-balls, fits all monomials of degree <= 4 at each radius and removes the
leading truncation error by Richardson extrapolation across the ladder.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..analytic_core import hemisphere_moment, quadrature_rule
from .curvature import CurvatureData, curvature_data
from .fermi import fermi_chart
from .models import ManifoldModel

__all__ = ["ExpansionFitReport", "verify_metric_expansion", "tec_lemma_check", "random_curvature_tensor", "curvature_symmetry_defect"]

FIT_DEGREE = 4


def _monomials(dim: int, max_degree: int):
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), deg):
            out.append(combo)
    return out


def _monomial_name(combo) -> str:
    if not combo:
        return "1"
    parts = []
    for v in sorted(set(combo)):
        k = combo.count(v)
        parts.append(f"x{v}" if k == 1 else f"x{v}^{k}")
    return "*".join(parts)


def _sample_pattern(n: int) -> np.ndarray:
    """Unit-radius half-ball sample pattern (fixed, deterministic)."""
    radial = np.array([0.2, 0.4, 0.6, 0.8, 1.0])
    if n == 1:
        th = np.linspace(0.0, math.pi, 13)
        dirs = np.column_stack([np.sin(th), np.cos(th)])
    else:
        dirs = [np.r_[0.0, math.cos(b), math.sin(b)] for b in np.linspace(0, 2 * math.pi, 12, endpoint=False)]
        for t in (0.3, 0.6, 0.85):
            s = math.sqrt(1 - t * t)
            dirs += [np.r_[t, s * math.cos(b), s * math.sin(b)] for b in np.linspace(0, 2 * math.pi, 10, endpoint=False)]
        dirs.append(np.r_[1.0, 0.0, 0.0])
        dirs = np.array(dirs)
    return (radial[:, None, None] * dirs[None, :, :]).reshape(-1, n + 1)


@dataclass
class ExpansionFitReport:
    """Per-term comparison of fitted and predicted Taylor coefficients.

    ``terms`` holds dictionaries with keys ``component``, ``monomial``,
    ``predicted``, ``fitted``, ``abs_diff``, ``error_estimate`` and
    ``asserted`` (False for the slot that is reported only).
    """

    model: str
    p: list
    radii: list
    terms: list = field(default_factory=list)
    max_g00_defect: float = 0.0
    max_g0j_defect: float = 0.0
    curvature: dict = field(default_factory=dict)

    def term(self, component: str, monomial: str) -> dict:
        for t in self.terms:
            if t["component"] == component and t["monomial"] == monomial:
                return t
        raise KeyError((component, monomial))

    def max_asserted_diff(self, monomial: str | None = None) -> float:
        diffs = [t["abs_diff"] for t in self.terms if t["asserted"] and (monomial is None or t["monomial"] == monomial)]
        return max(diffs) if diffs else 0.0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "p": self.p,
            "radii": self.radii,
            "max_g00_defect": self.max_g00_defect,
            "max_g0j_defect": self.max_g0j_defect,
            "terms": self.terms,
            "curvature": self.curvature,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _predictions(curv: CurvatureData, n: int, flat: bool):
    """Predicted coefficient of each monomial in ``g_ij`` (i, j >= 1)."""
    h = curv.h
    preds = {}
    for i in range(n):
        for j in range(i, n):
            comp = f"g{i + 1}{j + 1}"
            preds[(comp, (0,))] = (2 * h[i, j], True, None)
            preds[(comp, (0, 0))] = (curv.R0i0j[i, j] + (h @ h)[i, j], True, None)
            for k in range(n):
                derived = None
                if flat and n == 1:
                    # flat ambient: the slot is 2 d_s h_11 = -2 dH/ds
                    derived = -2.0 * float(curv.gradH[0])
                preds[(comp, (0, k + 1))] = (2 * curv.Rk0ij[k, i, j], not flat, derived)
            for k in range(n):
                for l in range(k, n):
                    R = curv.Rtilde
                    val = R[i, k, j, l] / 3 if k == l else (R[i, k, j, l] + R[i, l, j, k]) / 3
                    preds[(comp, (k + 1, l + 1))] = (val, True, None)
    return preds


def verify_metric_expansion(model: ManifoldModel, p, radii, valid_radius: float | None = None) -> ExpansionFitReport:
    """Fit the Taylor coefficients of the Fermi metric and compare with predictions.

    Parameters
    ----------
    model : ManifoldModel
    p : array_like
        Tangential coordinates of the base point.
    radii : sequence of float
        At least four radii; each successive radius should be half the
        previous one for the Richardson step.
    """
    radii = sorted((float(r) for r in radii), reverse=True)
    if len(radii) < 4:
        raise ValueError("need at least four radii")
    ratios = np.array(radii[:-1]) / np.array(radii[1:])
    if np.any(ratios < 1.2):
        raise ValueError("ill-conditioned fit: radii too clustered")
    n, dim = model.n, model.dim
    chart = fermi_chart(model, p, valid_radius or 1.01 * radii[0])
    curv = curvature_data(model, p)
    monos = _monomials(dim, FIT_DEGREE)
    pattern = _sample_pattern(n)
    comps = [(a, b) for a in range(dim) for b in range(a, dim)]
    fits = []
    g00_def = g0j_def = 0.0
    for rho in radii:
        X = rho * pattern
        G = chart.pullback_metrics(X)
        G = G - np.eye(dim)[None]
        g00_def = max(g00_def, float(np.max(np.abs(G[:, 0, 0]))))
        if n >= 1:
            g0j_def = max(g0j_def, float(np.max(np.abs(G[:, 0, 1:]))))
        A = np.column_stack([np.prod(X[:, list(c)], axis=1) if c else np.ones(len(X)) for c in monos])
        Y = np.column_stack([G[:, a, b] for a, b in comps])
        coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
        fits.append(coef)
    # Richardson: a degree-k coefficient carries an O(rho^(FIT_DEGREE+1-k)) error
    order = np.array([FIT_DEGREE + 1 - len(c) for c in monos], dtype=float)
    extrap = []
    for c_big, c_small, r_big, r_small in zip(fits[:-1], fits[1:], radii[:-1], radii[1:]):
        q = (r_big / r_small) ** order[:, None]
        extrap.append((q * c_small - c_big) / (q - 1))
    best, prev = extrap[-1], extrap[-2]
    preds = _predictions(curv, n, model.is_flat_euclidean)
    terms = []
    for ci, (a, b) in enumerate(comps):
        comp = f"g{a}{b}"
        for mi, mono in enumerate(monos):
            if len(mono) == 0 or len(mono) > 2:
                continue
            fitted = float(best[mi, ci])
            err = float(abs(best[mi, ci] - prev[mi, ci]))
            if a == 0:
                pred, asserted, derived = 0.0, True, None
            else:
                pred, asserted, derived = preds.get((comp, mono), (0.0, True, None))
            entry = {
                "component": comp,
                "monomial": _monomial_name(mono),
                "predicted": float(pred),
                "fitted": fitted,
                "abs_diff": abs(fitted - float(pred)),
                "error_estimate": err,
                "asserted": bool(asserted),
            }
            if derived is not None:
                entry["derived_flat"] = derived
                entry["abs_diff_derived"] = abs(fitted - derived)
            terms.append(entry)
    return ExpansionFitReport(
        model=model.name,
        p=[float(v) for v in np.atleast_1d(p)],
        radii=radii,
        terms=terms,
        max_g00_defect=g00_def,
        max_g0j_defect=g0j_def,
        curvature=curv.to_dict(),
    )


def curvature_symmetry_defect(T: np.ndarray) -> float:
    """Largest violation of the algebraic curvature symmetries."""
    d1 = np.max(np.abs(T + T.transpose(1, 0, 2, 3)))
    d2 = np.max(np.abs(T + T.transpose(0, 1, 3, 2)))
    d3 = np.max(np.abs(T - T.transpose(2, 3, 0, 1)))
    bianchi = T + T.transpose(0, 2, 3, 1) + T.transpose(0, 3, 1, 2)
    return float(max(d1, d2, d3, np.max(np.abs(bianchi))))


def random_curvature_tensor(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random tensor with the symmetries of a curvature tensor in dimension ``n+1``."""
    m = n + 1
    T = rng.normal(size=(m,) * 4)
    T = T - T.transpose(1, 0, 2, 3)
    T = T - T.transpose(0, 1, 3, 2)
    T = T + T.transpose(2, 3, 0, 1)
    # remove the totally antisymmetric part so the first Bianchi identity holds
    T = T - (T + T.transpose(0, 2, 3, 1) + T.transpose(0, 3, 1, 2)) / 3
    return T / 8


def tec_lemma_check(tensor, n: int, *, symmetry_tol: float = 1e-10) -> dict:
    """Hemisphere integrals of curvature contractions.

    ``tec1[s] = sum_{ijk} R_{k0ij} int x0 x^i x^j x^k x^s`` (zero by the
    antisymmetry in ``ij``) and ``tec2[s] = sum_{ij} R_{i0ij} int x0 x^j x^s``
    compared with ``-(int x0 (x1)^2) H_s``, ``H_s = -sum_i R_{i0is}``.
    """
    T = np.asarray(tensor, dtype=float)
    m = n + 1
    if T.shape != (m,) * 4:
        raise ValueError(f"tensor must have shape {(m,) * 4}")
    defect = curvature_symmetry_defect(T)
    scale = max(1.0, float(np.max(np.abs(T))))
    if defect > symmetry_tol * scale:
        raise ValueError(f"curvature symmetry violation {defect:.3e}")
    rule = quadrature_rule(n, 48)
    pts, w = rule.sphere_points, rule.sphere_weights
    x0 = pts[:, 0]
    xt = pts[:, 1:]
    R_k0ij = T[1:, 0, 1:, 1:]
    cubic = np.einsum("kij,pi,pj,pk->p", R_k0ij, xt, xt, xt)
    tec1 = [float(np.dot(w, x0 * cubic * xt[:, s])) for s in range(n)]
    R_i0ij = T[1:, 0, 1:, 1:]
    lin = np.einsum("iij,pj->p", R_i0ij, xt)
    tec2_lhs = [float(np.dot(w, x0 * lin * xt[:, s])) for s in range(n)]
    moment = hemisphere_moment([1, 2] + [0] * (n - 1))
    H_s = [-float(np.einsum("ii", R_i0ij[:, :, s])) for s in range(n)]
    tec2_rhs = [-moment * h for h in H_s]
    return {
        "n": n,
        "symmetry_defect": defect,
        "tec1": tec1,
        "tec1_max": float(max(abs(v) for v in tec1)),
        "tec2_lhs": tec2_lhs,
        "tec2_rhs": tec2_rhs,
        "tec2_max_diff": float(max(abs(a - b) for a, b in zip(tec2_lhs, tec2_rhs))),
        "H_s": H_s,
    }
