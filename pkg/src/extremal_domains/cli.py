"""Command-line experiment runner.

Every verb reads one block of a JSON config, writes JSON/CSV artifacts into
``--out`` together with the fully resolved config, and exits with

* 0 when every declared tolerance is met,
* 1 when a check fails (the failure list is written to ``failures.json``
  and printed on stdout),
* 2 on configuration errors.

Reports carry no timestamps or timings, so two runs with the same config
and seed produce byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analytic_core import first_bessel_zero, radial_eigenfunction
from .continuation import (
    ContinuationError,
    PerturbedHalfBallSpec,
    SolverConfig,
    epsilon_sweep,
    evaluate_F,
    fit_power_law,
    kernel_obstruction,
    solve_extremal,
)
from .fem import DomainSpec, mesh_domain, solve_first_eigenpair
from .geometry import ConfigError, half_space, model_from_config, random_curvature_tensor, tec_lemma_check, verify_metric_expansion
from .hemisphere import HemisphereFunction, kernel_basis, kernel_projection, l0_eigenvalue, mode_table_csv
from .shape_calculus import (
    DeformationField,
    contact_angle,
    finite_difference_derivative,
    hadamard_derivative,
    volume_preserving_projection,
)

log = logging.getLogger("extremal_domains")

VERBS = ("eigen", "shape-derivative", "l0-spectrum", "fermi-verify", "tec-check", "extremal", "sweep", "all")

DEFAULT_MODEL = {"variant": "epigraph", "n": 1, "h": "0.5*x1**2 + 0.1*x1**3 + 0.25*x1**4", "name": "default"}


# --- config blocks --------------------------------------------------------------


@dataclass(frozen=True)
class EigenConfig:
    """Mixed eigenpair on a model domain over a mesh ladder."""

    domain: dict = field(default_factory=lambda: {"kind": "half_disk"})
    mesh_ladder: list = field(default_factory=lambda: [0.1, 0.05, 0.025, 0.02])
    grading: float = 0.5
    order_range: list = field(default_factory=lambda: [1.7, 2.3])
    tol_richardson: float = 1e-4
    tol_flux: float = 5e-3
    tol_angle: float = 2e-2


@dataclass(frozen=True)
class ShapeDerivativeConfig:
    """Hadamard formula against finite differences on random fields."""

    domains: list = field(
        default_factory=lambda: [
            {"kind": "half_ellipse", "a": 1.2, "b": 0.8, "tilt": 0.1},
            {"kind": "radial_graph", "modes": [[2, 0.1]]},
            {"kind": "half_ellipse", "a": 0.8, "b": 1.1},
        ]
    )
    h: float = 0.025
    n_fields: int = 5
    n_interior: int = 1
    t: float = 1e-3
    tol_rel: float = 1e-2
    noise_factor: float = 10.0


@dataclass(frozen=True)
class L0SpectrumConfig:
    dims: list = field(default_factory=lambda: [2, 3])
    lmax: int = 8
    tol_kernel: float = 1e-10
    tol_fixed_point: float = 1e-12


@dataclass(frozen=True)
class FermiVerifyConfig:
    model: dict = field(default_factory=lambda: {"variant": "epigraph", "n": 1, "h": "0.5*x1**2", "name": "parabola"})
    p: list = field(default_factory=lambda: [0.0])
    patch: dict = field(default_factory=lambda: {"variant": "patch", "family": "sphere_cap", "latitude": 0.35, "n": 1})
    patch_p: list = field(default_factory=lambda: [0.0])
    radii: list = field(default_factory=lambda: [0.16, 0.08, 0.04, 0.02])
    tol_first: float = 1e-6
    tol_normal: float = 1e-8
    tol_second: float = 1e-5


@dataclass(frozen=True)
class TecCheckConfig:
    n: int = 2
    n_tensors: int = 20
    tol: float = 1e-12


@dataclass(frozen=True)
class ExtremalConfig:
    model: dict = field(default_factory=lambda: dict(DEFAULT_MODEL))
    eps: float = 0.1
    p_init: float | None = None
    solver: dict = field(default_factory=dict)
    tol_flux: float = 1e-4
    tol_angle: float = 2e-2


@dataclass(frozen=True)
class SweepConfig:
    model: dict = field(default_factory=lambda: dict(DEFAULT_MODEL))
    eps: list = field(default_factory=lambda: [0.2, 0.14, 0.1, 0.07, 0.05])
    p_fixed: float | None = 0.0
    solver: dict = field(default_factory=lambda: {"h": 0.02, "lmax": 128})
    tol_constant: float = 0.1
    min_slope: float = 0.9
    tol_flux: float = 1e-4
    tol_angle: float = 2e-2


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    eigen: EigenConfig = field(default_factory=EigenConfig)
    shape_derivative: ShapeDerivativeConfig = field(default_factory=ShapeDerivativeConfig)
    l0_spectrum: L0SpectrumConfig = field(default_factory=L0SpectrumConfig)
    fermi_verify: FermiVerifyConfig = field(default_factory=FermiVerifyConfig)
    tec_check: TecCheckConfig = field(default_factory=TecCheckConfig)
    extremal: ExtremalConfig = field(default_factory=ExtremalConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def _from_dict(cls, data, where: str):
    """Strict dataclass construction: unknown keys raise ConfigError."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    extra = set(data) - set(fields)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    kwargs = {}
    for name, value in data.items():
        sub = fields[name].default_factory if fields[name].default_factory is not dataclasses.MISSING else None
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[name] = _from_dict(sub, value, f"{where}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return _from_dict(ExperimentConfig, data, "config")


def _solver(block: dict) -> SolverConfig:
    return _from_dict(SolverConfig, block, "solver")


def _domain(cfg: dict) -> DomainSpec:
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    allowed = {
        "half_disk": {"radius"},
        "disk": {"radius"},
        "quarter_disk": {"radius"},
        "half_ellipse": {"a", "b", "tilt"},
        "radial_graph": {"modes"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown domain kind {kind!r}")
    if set(cfg) - allowed[kind]:
        raise ConfigError(f"domain {kind}: unknown keys {sorted(set(cfg) - allowed[kind])}")
    if kind == "radial_graph":
        modes = [(int(k), float(a)) for k, a in cfg.get("modes", [])]
        return DomainSpec.radial_graph(lambda t: sum(a * np.cos(k * np.asarray(t)) for k, a in modes) + 0 * np.asarray(t), label=f"radial_graph{modes}")
    try:
        return getattr(DomainSpec, kind)(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"domain {kind}: {exc}") from exc


def _exact_lambda(cfg: dict) -> float | None:
    """Closed-form first eigenvalue where one exists (all three have a J0 ground state)."""
    if cfg.get("kind") in ("half_disk", "disk", "quarter_disk"):
        return first_bessel_zero(0.0) ** 2 / float(cfg.get("radius", 1.0)) ** 2
    return None


def _check(name: str, value, tol, passed: bool, **extra) -> dict:
    out = {"check": name, "value": value, "tol": tol, "passed": bool(passed)}
    out.update(extra)
    return out


def _finite(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


# --- verbs -------------------------------------------------------------------------


def run_eigen(cfg: EigenConfig, seed: int) -> tuple[dict, list]:
    spec = _domain(cfg.domain)
    exact = _exact_lambda(cfg.domain)
    rows, checks = [], []
    for h in cfg.mesh_ladder:
        pair = solve_first_eigenpair(mesh_domain(spec, h, cfg.grading))
        stats = pair.flux_stats()
        rows.append(
            {
                "h": h,
                "lambda": pair.eigenvalue,
                "residual": pair.residual,
                "volume": pair.volume,
                "flux_mean": stats["mean"],
                "flux_std_rel": stats["std"] / abs(stats["mean"]),
                "contact_angles": contact_angle(pair.mesh).tolist(),
                "abs_error": None if exact is None else abs(pair.eigenvalue - exact),
            }
        )
        log.info("eigen h=%g lambda=%.12g", h, pair.eigenvalue)
    if exact is not None and len(rows) >= 3:
        first = rows[:3]
        hs = [r["h"] for r in first]
        order = fit_power_law(hs, [r["abs_error"] for r in first])["slope"]
        lo, hi = cfg.order_range
        checks.append(_check("eigen.order", order, cfg.order_range, lo <= order <= hi))
        q = (hs[1] / hs[2]) ** 2
        rich = (q * first[2]["lambda"] - first[1]["lambda"]) / (q - 1)
        checks.append(_check("eigen.richardson_error", abs(rich - exact), cfg.tol_richardson, abs(rich - exact) <= cfg.tol_richardson, richardson=rich, exact=exact))
    if cfg.domain.get("kind") in ("half_disk", "quarter_disk"):
        flux = [r["flux_std_rel"] for r in rows]
        checks.append(_check("eigen.flux_std_finest", flux[-1], cfg.tol_flux, flux[-1] <= cfg.tol_flux))
        checks.append(_check("eigen.flux_std_decreasing", flux, None, all(b < a for a, b in zip(flux, flux[1:]))))
        ang = max(abs(a - math.pi / 2) for r in rows for a in r["contact_angles"])
        checks.append(_check("eigen.contact_angle", ang, cfg.tol_angle, ang <= cfg.tol_angle))
    report = {"domain": cfg.domain, "exact": exact, "rows": rows, "checks": checks}
    return {"eigen.json": _dumps(report)}, checks


def run_shape_derivative(cfg: ShapeDerivativeConfig, seed: int) -> tuple[dict, list]:
    rng = np.random.default_rng(seed)
    records, checks = [], []
    for di, dcfg in enumerate(cfg.domains):
        spec = _domain(dcfg)
        mesh = mesh_domain(spec, cfg.h)
        pair = solve_first_eigenpair(mesh)
        for k in range(cfg.n_fields):
            V = volume_preserving_projection(DeformationField.random(rng), mesh)
            formula = hadamard_derivative(pair, V)
            fd = finite_difference_derivative(mesh, V, cfg.t)["richardson"]
            rel = abs(formula - fd) / abs(fd)
            fid = f"d{di}.random{k}"
            records.append({"formula": formula, "fd": fd, "rel_err": rel, "mesh_h": cfg.h, "field_id": fid, "domain": dcfg})
            checks.append(_check(f"shape.{fid}", rel, cfg.tol_rel, rel <= cfg.tol_rel))
        if cfg.n_interior:
            fine = solve_first_eigenpair(mesh_domain(spec, cfg.h / 2))
            noise = 4 / 3 * abs(pair.eigenvalue - fine.eigenvalue)
            # support strictly inside the free boundary
            radius = 0.95 * float(np.min(spec.radius(np.linspace(0.0, spec.span, 721))))
            for k in range(cfg.n_interior):
                V = DeformationField.interior(rng, radius=radius)
                formula = hadamard_derivative(pair, V)
                fd = finite_difference_derivative(mesh, V, cfg.t)["richardson"]
                fid = f"d{di}.interior{k}"
                bound = cfg.noise_factor * noise
                records.append({"formula": formula, "fd": fd, "rel_err": None, "mesh_h": cfg.h, "field_id": fid, "domain": dcfg, "noise": noise})
                checks.append(_check(f"shape.{fid}", max(abs(formula), abs(fd)), bound, max(abs(formula), abs(fd)) <= bound))
    return {"shape_derivative.json": _dumps({"records": records, "checks": checks})}, checks


def run_l0_spectrum(cfg: L0SpectrumConfig, seed: int) -> tuple[dict, list]:
    checks, parts = [], []
    for d in cfg.dims:
        eig = radial_eigenfunction(d)
        csv_text = mode_table_csv(eig, cfg.lmax)
        parts.append(csv_text if not parts else csv_text.split("\n", 1)[1])
        mu1 = abs(l0_eigenvalue(1, eig))
        checks.append(_check(f"l0.mu1.d{d}", mu1, cfg.tol_kernel, mu1 <= cfg.tol_kernel))
        for i, b in enumerate(kernel_basis(d - 1, cfg.lmax)):
            k, rest = kernel_projection(b)
            dev = float(np.max(np.abs(k.coeffs - b.coeffs))) + rest.norm()
            checks.append(_check(f"l0.kernel_fixed.d{d}.{i}", dev, cfg.tol_fixed_point, dev <= cfg.tol_fixed_point))
    return {"l0_spectrum.csv": "".join(parts), "l0_spectrum.json": _dumps({"checks": checks})}, checks


def run_fermi_verify(cfg: FermiVerifyConfig, seed: int) -> tuple[dict, list]:
    model = model_from_config(cfg.model)
    rep = verify_metric_expansion(model, cfg.p, cfg.radii)
    first = [t for t in rep.terms if t["monomial"] == "x0" and t["component"] != "g00" and t["asserted"]]
    d1 = max(t["abs_diff"] for t in first)
    checks = [
        _check("fermi.first_order", d1, cfg.tol_first, d1 <= cfg.tol_first),
        _check("fermi.g00", rep.max_g00_defect, cfg.tol_normal, rep.max_g00_defect <= cfg.tol_normal),
        _check("fermi.g0j", rep.max_g0j_defect, cfg.tol_normal, rep.max_g0j_defect <= cfg.tol_normal),
    ]
    patch = verify_metric_expansion(model_from_config(cfg.patch), cfg.patch_p, cfg.radii)
    second = [t for t in patch.terms if t["monomial"] == "x0^2" and t["component"] != "g00"]
    d2 = max(t["abs_diff"] for t in second)
    checks.append(_check("fermi.second_order_patch", d2, cfg.tol_second, d2 <= cfg.tol_second))
    return {"fermi_verify.json": _dumps({"model": rep.to_dict(), "patch": patch.to_dict(), "checks": checks})}, checks


def run_tec_check(cfg: TecCheckConfig, seed: int) -> tuple[dict, list]:
    rng = np.random.default_rng(seed)
    rows = [tec_lemma_check(random_curvature_tensor(cfg.n, rng), cfg.n) for _ in range(cfg.n_tensors)]
    t1 = max(r["tec1_max"] for r in rows)
    t2 = max(r["tec2_max_diff"] for r in rows)
    checks = [_check("tec.tec1", t1, cfg.tol, t1 <= cfg.tol), _check("tec.tec2", t2, cfg.tol, t2 <= cfg.tol)]
    return {"tec_check.json": _dumps({"rows": rows, "checks": checks})}, checks


def _flux_floor(config: SolverConfig) -> float:
    """Flux residual of the exact half-disk on the solver's mesh."""
    return evaluate_F(PerturbedHalfBallSpec(half_space(1), 0.0, 0.1), config).flux_residual


def run_extremal(cfg: ExtremalConfig, seed: int) -> tuple[dict, list]:
    model = model_from_config(cfg.model)
    solver = _solver(cfg.solver)
    try:
        st = solve_extremal(model, cfg.eps, cfg.p_init, solver)
    except ContinuationError as exc:
        checks = [_check("extremal.converged", None, None, False, message=str(exc))]
        return {"extremal.json": _dumps({"error": str(exc), "history": exc.history, "checks": checks})}, checks
    G = float(kernel_obstruction(st)[0])
    bound = max(cfg.tol_flux, _flux_floor(solver))
    ang = max(abs(a - math.pi / 2) for a in st.contact_angles)
    checks = [
        _check("extremal.converged", st.residual_perp, solver.tol_inner, st.converged and st.residual_perp <= solver.tol_inner),
        _check("extremal.obstruction", abs(G), solver.tol_outer, abs(G) <= solver.tol_outer),
        _check("extremal.flux_std", st.flux_residual, bound, st.flux_residual <= bound),
        _check("extremal.contact_angle", ang, cfg.tol_angle, ang <= cfg.tol_angle),
    ]
    return {"extremal.json": _dumps({"state": st.to_dict(), "checks": checks})}, checks


def _tidy(rep) -> str:
    """One observation per row: eps, quantity, value."""
    lines = ["eps,quantity,value"]
    for r in rep.rows:
        for key in sorted(r):
            if key != "eps" and isinstance(r[key], (int, float)):
                lines.append(f"{r['eps']:.12g},{key},{r[key]:.12g}")
    return "\n".join(lines) + "\n"


def run_sweep(cfg: SweepConfig, seed: int) -> tuple[dict, list]:
    model = model_from_config(cfg.model)
    solver = _solver(cfg.solver)
    try:
        rep = epsilon_sweep(model, cfg.eps, cfg.p_fixed, None, solver)
    except ContinuationError as exc:
        checks = [_check("sweep.converged", None, None, False, message=str(exc))]
        return {"sweep.json": _dumps({"error": str(exc), "history": exc.history, "checks": checks})}, checks
    c = rep.constants
    floor = _flux_floor(solver)
    bound = max(cfg.tol_flux, floor)
    flux = max(r["flux_std"] for r in rep.rows)
    ang = max(r["contact_angle_defect"] for r in rep.rows)
    s_dist, s_vbar = rep.fits["dist_p"]["slope"], rep.fits["vbar_norm"]["slope"]
    checks = [
        _check("sweep.kernel_constant", _finite(c["relative_error"]), cfg.tol_constant, c["relative_error"] <= cfg.tol_constant, fitted=c["fitted_c2"], predicted=c["predicted_c2"], derived=c["derived_c2"], relative_error_derived=c["relative_error_derived"]),
        _check("sweep.converged", len(rep.rows), len(cfg.eps), len(rep.rows) == len(cfg.eps)),
        _check("sweep.dist_p_slope", _finite(s_dist), cfg.min_slope, s_dist >= cfg.min_slope),
        _check("sweep.vbar_slope", _finite(s_vbar), cfg.min_slope, s_vbar >= cfg.min_slope),
        _check("sweep.flux_std", flux, bound, flux <= bound, floor=floor),
        _check("sweep.contact_angle", ang, cfg.tol_angle, ang <= cfg.tol_angle),
    ]
    out = {
        "sweep.json": rep.to_json() + "\n",
        "sweep.csv": rep.to_csv(),
        "sweep_tidy.csv": _tidy(rep),
        "sweep_fits.json": _dumps({"fits": rep.fits, "constants": rep.constants, "checks": checks}),
    }
    return out, checks


RUNNERS = {
    "eigen": ("eigen", run_eigen),
    "shape-derivative": ("shape_derivative", run_shape_derivative),
    "l0-spectrum": ("l0_spectrum", run_l0_spectrum),
    "fermi-verify": ("fermi_verify", run_fermi_verify),
    "tec-check": ("tec_check", run_tec_check),
    "extremal": ("extremal", run_extremal),
    "sweep": ("sweep", run_sweep),
}


# --- output -------------------------------------------------------------------------


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, HemisphereFunction):
        return [float(c) for c in o.coeffs]
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default, allow_nan=True) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _run_verb(verb: str, cfg: ExperimentConfig) -> tuple[dict, list]:
    key, fn = RUNNERS[verb]
    return fn(getattr(cfg, key), cfg.seed)


def run(verb: str, cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    """Run ``verb`` and write its artifacts under ``out``; return the exit code."""
    out = Path(out)
    _write_atomic(out / "config.json", _dumps(asdict(cfg)))
    verbs = [v for v in VERBS if v != "all"] if verb == "all" else [verb]
    if jobs > 1 and len(verbs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_verb, verbs, [cfg] * len(verbs)))
    else:
        results = [_run_verb(v, cfg) for v in verbs]
    checks = []
    for v, (artifacts, verb_checks) in zip(verbs, results):
        sub = out / v if verb == "all" else out
        for name, text in artifacts.items():
            _write_atomic(sub / name, text)
        checks += [dict(c, verb=v) for c in verb_checks]
    failures = [c for c in checks if not c["passed"]]
    report = {"verb": verb, "seed": cfg.seed, "checks": checks, "n_checks": len(checks), "n_failed": len(failures)}
    _write_atomic(out / "report.json", _dumps(report))
    if failures:
        _write_atomic(out / "failures.json", _dumps(failures))
        print(_dumps(failures), end="")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="extremal-domains", description=__doc__.split("\n\n")[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", help="JSON config; omitted blocks take their defaults")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel verb workers for 'all'")
    p.add_argument("--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.jobs < 1:
            raise ConfigError("--jobs must be positive")
        # validate every block up front so config errors never surface mid-run
        for key in ("extremal", "sweep"):
            block = getattr(cfg, key)
            _solver(block.solver)
            model_from_config(block.model)
        for d in [cfg.eigen.domain, *cfg.shape_derivative.domains]:
            _domain(d)
        model_from_config(cfg.fermi_verify.model)
        model_from_config(cfg.fermi_verify.patch)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(args.verb, cfg, Path(args.out), args.jobs)


if __name__ == "__main__":
    sys.exit(main())
