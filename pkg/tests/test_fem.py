import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_domains.analytic_core import radial_eigenfunction
from extremal_domains.fem import (
    DIRICHLET,
    NEUMANN,
    DomainSpec,
    SimplicialMesh,
    assemble,
    boundary_mass,
    mesh_domain,
    read_mesh,
    recover_flux,
    rectangle_mesh,
    solve_first_eigenpair,
    volume,
    write_mesh,
)

LAMBDA_DISK = radial_eigenfunction(2).lambda1
DPHI_DISK = radial_eigenfunction(2).dphi1


@pytest.fixture(scope="module")
def half_disk_ladder():
    out = {}
    for h in (0.1, 0.05, 0.025):
        mesh = mesh_domain(DomainSpec.half_disk(), h)
        out[h] = (mesh, solve_first_eigenpair(mesh))
    return out


# --- meshing ---------------------------------------------------------------


def test_wall_facets_on_wall():
    mesh = mesh_domain(DomainSpec.half_disk(), 0.05)
    wall = mesh.facets_with_tag(NEUMANN)
    assert len(wall) > 0
    assert np.max(np.abs(mesh.vertices[wall.ravel(), 0])) <= 1e-12


def test_grading_near_edge():
    h = 0.05
    mesh = mesh_domain(DomainSpec.half_disk(), h, grading=0.25)
    corners = np.array([[0.0, 1.0], [0.0, -1.0]])
    mid = 0.5 * (mesh.vertices[mesh.facets[:, 0]] + mesh.vertices[mesh.facets[:, 1]])
    dist = np.min(np.linalg.norm(mid[:, None] - corners[None], axis=2), axis=1)
    near = mesh.facet_lengths()[dist < 2 * h]
    assert near.min() <= 0.3 * h
    assert len(mesh.boundary_edge_vertices) == 2


def test_radial_graph_boundary_vertices():
    eps = 0.3
    v = lambda t: 0.1 * np.cos(2 * t)
    mesh = mesh_domain(DomainSpec.radial_graph(v, eps), 0.1)
    arc = np.unique(mesh.facets_with_tag(DIRICHLET).ravel())
    y = mesh.vertices[arc]
    r = np.hypot(y[:, 0], y[:, 1])
    theta = np.arctan2(y[:, 0], y[:, 1])
    assert np.max(np.abs(r - eps * (1 + v(theta)))) <= 1e-10


def test_degenerate_radial_graph_rejected():
    with pytest.raises(ValueError):
        DomainSpec.radial_graph(lambda t: -1.5 + 0 * t)


@pytest.mark.parametrize("h, grading", [(0.0, 0.5), (0.7, 0.5), (0.1, 0.0), (0.1, 1.5)])
def test_mesh_argument_errors(h, grading):
    with pytest.raises(ValueError):
        mesh_domain(DomainSpec.half_disk(), h, grading)


def test_validate_detects_inverted_cell():
    mesh = mesh_domain(DomainSpec.half_disk(), 0.2)
    cells = mesh.cells.copy()
    cells[0] = cells[0][[0, 2, 1]]
    bad = SimplicialMesh(mesh.vertices, cells, mesh.facets, mesh.tags)
    with pytest.raises(ValueError):
        bad.validate()


def test_validate_detects_missing_tag():
    mesh = mesh_domain(DomainSpec.half_disk(), 0.2)
    bad = SimplicialMesh(mesh.vertices, mesh.cells, mesh.facets[1:], mesh.tags[1:])
    with pytest.raises(ValueError):
        bad.validate()


def test_mesh_io_round_trip(tmp_path):
    mesh = mesh_domain(DomainSpec.half_ellipse(1.2, 0.8), 0.1)
    path = tmp_path / "m.txt"
    write_mesh(mesh, path)
    assert path.read_text().split("\n")[0] == f"2 {mesh.nv} {len(mesh.cells)} {len(mesh.facets)}"
    back = read_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.cells, mesh.cells)
    assert np.array_equal(back.facets, mesh.facets)
    assert np.array_equal(back.tags, mesh.tags)


# --- volume ----------------------------------------------------------------


def test_half_disk_volume_second_order():
    errs = [abs(volume(mesh_domain(DomainSpec.half_disk(), h)) - math.pi / 2) for h in (0.1, 0.05)]
    assert errs[1] < 1e-3
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_scaled_half_disk_volume():
    eps = 0.2
    a = volume(mesh_domain(DomainSpec.half_disk(), 0.05))
    b = volume(mesh_domain(DomainSpec.half_disk(eps), 0.05))
    assert b == pytest.approx(eps**2 * a, rel=1e-12)


def test_perturbed_volume_matches_graph_area():
    eps = 0.5
    v = lambda t: 0.1 * np.cos(2 * t)
    t, w = np.polynomial.legendre.leggauss(40)
    t = 0.5 * math.pi * (t + 1)
    exact = 0.5 * float(np.sum(0.5 * math.pi * w * eps**2 * (1 + v(t)) ** 2))
    errs = [abs(volume(mesh_domain(DomainSpec.radial_graph(v, eps), h)) - exact) for h in (0.1, 0.05)]
    assert errs[1] < 2e-4
    assert errs[0] / errs[1] > 3.0


def test_metric_volume():
    # constant metric diag(4, 1) doubles the area
    mesh = mesh_domain(DomainSpec.half_disk(), 0.1)
    metric = lambda pts: np.broadcast_to(np.diag([4.0, 1.0]), (len(pts), 2, 2))
    assert volume(mesh, metric=metric) == pytest.approx(2 * volume(mesh), rel=1e-13)


# --- eigenpairs ------------------------------------------------------------


def test_half_disk_convergence_order(half_disk_ladder):
    errs = [half_disk_ladder[h][1].eigenvalue - LAMBDA_DISK for h in (0.1, 0.05, 0.025)]
    assert all(e > 0 for e in errs)
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.7 <= q <= 2.3 for q in orders), orders
    richardson = (4 * errs[2] - errs[1]) / 3
    assert abs(richardson) < 2e-5


def test_eigenpair_normalisation_and_residual(half_disk_ladder):
    mesh, pair = half_disk_ladder[0.05]
    K, M = assemble(pair.space)
    u = pair.u
    assert u @ (M @ u) == pytest.approx(1.0, abs=1e-12)
    assert pair.residual <= 1e-10
    free = pair.space.free_dofs
    r = (K @ u - pair.eigenvalue * (M @ u))[free]
    assert np.linalg.norm(r) <= 1e-9 * np.linalg.norm((M @ u)[free])
    assert np.all(u[free] > -1e-10)
    assert np.all(u[pair.space.dirichlet_dofs] == 0)


@pytest.mark.parametrize("spec", [DomainSpec.disk(), DomainSpec.quarter_disk()])
def test_reflected_domains_share_the_limit(spec):
    lam = [solve_first_eigenpair(mesh_domain(spec, h)).eigenvalue for h in (0.1, 0.05)]
    extrap = (4 * lam[1] - lam[0]) / 3
    assert extrap == pytest.approx(LAMBDA_DISK, abs=1e-3)


def test_half_disk_flux_constant(half_disk_ladder):
    devs = []
    for h in (0.1, 0.05, 0.025):
        q = half_disk_ladder[h][1].flux.facet_means()
        devs.append(np.max(np.abs(q - DPHI_DISK)))
    assert devs[-1] < 1e-3
    assert devs[0] / devs[1] > 2.8 and devs[1] / devs[2] > 2.8
    mean = half_disk_ladder[0.025][1].flux.mean()
    assert mean == pytest.approx(DPHI_DISK, abs=2e-4)


def test_square_flux_closed_form():
    errs = []
    for n in (8, 16):
        pair = solve_first_eigenpair(rectangle_mesh(n, n))
        f = pair.flux
        y = f.points
        on_x = np.isclose(y[..., 0], 0) | np.isclose(y[..., 0], 1)
        tang = np.where(on_x, y[..., 1], y[..., 0])
        errs.append(np.max(np.abs(f.values + 2 * math.pi * np.sin(math.pi * tang))))
        assert pair.eigenvalue == pytest.approx(2 * math.pi**2, rel=1e-4)
    assert errs[1] < 0.02
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_flux_satisfies_defining_equation(rng):
    mesh = mesh_domain(DomainSpec.half_ellipse(1.1, 0.9, 0.2), 0.1)
    pair = solve_first_eigenpair(mesh)
    K, M = assemble(pair.space)
    dd = pair.space.dirichlet_dofs
    B = boundary_mass(pair.space, mesh.facets_with_tag(DIRICHLET))
    r = K @ pair.u - pair.eigenvalue * (M @ pair.u)
    ones = np.zeros(pair.space.ndofs)
    ones[dd] = 1.0
    for _ in range(3):
        phi = np.zeros(pair.space.ndofs)
        phi[dd] = rng.normal(size=len(dd))
        phi -= (ones @ B @ phi) / (ones @ B @ ones) * ones
        assert abs(pair.flux.nodal @ B @ phi - r @ phi) <= 1e-10


def test_recover_flux_is_reproducible(half_disk_ladder):
    _, pair = half_disk_ladder[0.1]
    again = recover_flux(pair)
    assert np.allclose(again.values, pair.flux.values, atol=1e-12)


def test_rotated_mesh_same_eigenvalue():
    mesh = mesh_domain(DomainSpec.half_ellipse(1.0, 0.7), 0.1)
    c, s = math.cos(0.7), math.sin(0.7)
    rotated = mesh.with_vertices(mesh.vertices @ np.array([[c, s], [-s, c]]) + np.array([0.3, -1.1]))
    a = solve_first_eigenpair(mesh).eigenvalue
    b = solve_first_eigenpair(rotated).eigenvalue
    assert abs(a - b) <= 1e-12 * a


@settings(max_examples=10)
@given(st.floats(0.0, 2 * math.pi), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_rigid_motion_invariance(angle, dx, dy):
    mesh = _small_mesh()
    c, s = math.cos(angle), math.sin(angle)
    moved = mesh.with_vertices(mesh.vertices @ np.array([[c, s], [-s, c]]) + np.array([dx, dy]))
    assert solve_first_eigenpair(moved).eigenvalue == pytest.approx(_SMALL_LAMBDA, rel=1e-11)


def _small_mesh():
    return mesh_domain(DomainSpec.half_disk(), 0.25)


_SMALL_LAMBDA = solve_first_eigenpair(_small_mesh()).eigenvalue


def test_shrinking_raises_eigenvalue():
    def extrap(radius):
        lam = [solve_first_eigenpair(mesh_domain(DomainSpec.half_disk(radius), h)).eigenvalue for h in (0.1, 0.05)]
        return (4 * lam[1] - lam[0]) / 3

    small, big = extrap(0.9), extrap(1.0)
    assert small > big
    assert small == pytest.approx(big / 0.81, rel=1e-4)


def test_metric_scaling():
    # metric c^2 * identity scales the eigenvalue by 1/c^2
    mesh = mesh_domain(DomainSpec.half_disk(), 0.1)
    metric = lambda pts: np.broadcast_to(4.0 * np.eye(2), (len(pts), 2, 2))
    a = solve_first_eigenpair(mesh).eigenvalue
    b = solve_first_eigenpair(mesh, metric=metric).eigenvalue
    assert b == pytest.approx(a / 4, rel=1e-12)


def test_no_dirichlet_rejected():
    mesh = rectangle_mesh(4, 4, tags=(NEUMANN,) * 4)
    with pytest.raises(ValueError):
        solve_first_eigenpair(mesh)


def test_report_json(half_disk_ladder):
    import json

    _, pair = half_disk_ladder[0.1]
    rep = json.loads(pair.to_json())
    assert {"eigenvalue", "volume", "flux"} <= rep.keys()
    assert {"min", "max", "mean", "std"} <= rep["flux"].keys()
