import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extremal_domains.analytic_core import radial_eigenfunction
from extremal_domains.fem import DIRICHLET, NEUMANN, DomainSpec, mesh_domain, solve_first_eigenpair, volume
from extremal_domains.shape_calculus import (
    DeformationField,
    TransportError,
    contact_angle,
    extremality_residual,
    finite_difference_derivative,
    flow_transport,
    hadamard_derivative,
    normal_flux,
    outward_normals,
    volume_preserving_projection,
)

EIG = radial_eigenfunction(2)


@pytest.fixture(scope="module")
def half_disk():
    mesh = mesh_domain(DomainSpec.half_disk(), 0.05)
    return mesh, solve_first_eigenpair(mesh)


def test_non_tangent_field_rejected():
    with pytest.raises(ValueError):
        DeformationField(lambda y: np.ones_like(y))


def test_zero_flow_is_identity(half_disk):
    mesh, _ = half_disk
    moved = flow_transport(mesh, DeformationField.zero(), 0.3)
    assert np.array_equal(moved.vertices, mesh.vertices)
    assert np.array_equal(moved.tags, mesh.tags)


def test_translation_is_rigid(half_disk):
    mesh, pair = half_disk
    moved = flow_transport(mesh, DeformationField.translation(), 0.4)
    assert np.allclose(moved.vertices - mesh.vertices, [0.0, 0.4], atol=1e-12)
    lam = solve_first_eigenpair(moved).eigenvalue
    assert lam == pytest.approx(pair.eigenvalue, rel=1e-10)


def test_radial_flow_scaling_law(half_disk):
    mesh, pair = half_disk
    t = 0.2
    moved = flow_transport(mesh, DeformationField.radial(), t)
    assert np.allclose(moved.vertices, math.exp(t) * mesh.vertices, atol=1e-11)
    lam = solve_first_eigenpair(moved).eigenvalue
    assert lam == pytest.approx(math.exp(-2 * t) * pair.eigenvalue, rel=1e-10)


def test_wall_vertices_stay_on_wall(rng, half_disk):
    mesh, _ = half_disk
    moved = flow_transport(mesh, DeformationField.random(rng, scale=0.3), 0.1)
    wall = np.unique(mesh.facets_with_tag(NEUMANN).ravel())
    assert np.max(np.abs(moved.vertices[wall, 0])) <= 1e-9


def test_inversion_reported(half_disk):
    mesh, _ = half_disk
    swirl = DeformationField(lambda y: 40 * np.column_stack([y[:, 0] * y[:, 1], -y[:, 0] ** 2]), True, "swirl")
    with pytest.raises(TransportError):
        flow_transport(mesh, swirl, 1.0)


def test_outward_normals_half_disk(half_disk):
    mesh, _ = half_disk
    arc = mesh.facets_with_tag(DIRICHLET)
    n = outward_normals(mesh, arc)
    mid = 0.5 * (mesh.vertices[arc[:, 0]] + mesh.vertices[arc[:, 1]])
    assert np.all(np.sum(n * mid, axis=1) > 0.99 * np.linalg.norm(mid, axis=1))
    wall = outward_normals(mesh, mesh.facets_with_tag(NEUMANN))
    assert np.allclose(wall, [-1.0, 0.0])


def test_radial_hadamard_matches_pohozaev(half_disk):
    _, pair = half_disk
    formula = hadamard_derivative(pair, DeformationField.radial())
    # pi (d_r phi(1))^2 = 2 lambda_1 under unit L2 norm on the half-disk
    assert -math.pi * EIG.dphi1**2 == pytest.approx(-2 * EIG.lambda1, rel=1e-12)
    assert formula == pytest.approx(-2 * EIG.lambda1, rel=2e-3)


def test_tangential_field_on_free_boundary_gives_zero(half_disk):
    _, pair = half_disk
    rot = DeformationField(lambda y: np.column_stack([y[:, 1], -y[:, 0]]) * y[:, :1], True, "rot")
    assert abs(hadamard_derivative(pair, rot)) < 1e-2


def test_hadamard_against_finite_differences(rng):
    mesh = mesh_domain(DomainSpec.half_ellipse(1.2, 0.8, 0.1), 0.05)
    pair = solve_first_eigenpair(mesh)
    V = volume_preserving_projection(DeformationField.random(rng), mesh)
    fd = finite_difference_derivative(mesh, V)
    assert abs(hadamard_derivative(pair, V) - fd["richardson"]) <= 1e-2 * abs(fd["richardson"])


def test_interior_fields_do_not_move_lambda(rng):
    mesh = mesh_domain(DomainSpec.half_disk(), 0.05)
    pair = solve_first_eigenpair(mesh)
    fine = solve_first_eigenpair(mesh_domain(DomainSpec.half_disk(), 0.025))
    noise = 4 / 3 * abs(pair.eigenvalue - fine.eigenvalue)
    V = DeformationField.interior(rng)
    fd = finite_difference_derivative(mesh, V)["richardson"]
    assert abs(hadamard_derivative(pair, V)) <= 10 * noise
    assert abs(fd) <= 10 * noise


def test_projection_zero_flux(half_disk):
    mesh, _ = half_disk
    P = volume_preserving_projection(DeformationField.radial(), mesh)
    assert abs(normal_flux(mesh, P)) <= 1e-12


def test_projection_keeps_preserving_field(half_disk, rng):
    mesh, _ = half_disk
    V = volume_preserving_projection(DeformationField.random(rng), mesh)
    again = volume_preserving_projection(V, mesh)
    pts = rng.uniform(-1, 1, size=(20, 2))
    assert np.allclose(again(pts), V(pts), atol=1e-12)


def test_projection_rejects_degenerate_reference(half_disk):
    mesh, _ = half_disk
    with pytest.raises(ValueError):
        volume_preserving_projection(DeformationField.radial(), mesh, reference=DeformationField.zero())


def test_projected_flow_preserves_volume_to_second_order(rng):
    mesh = mesh_domain(DomainSpec.half_ellipse(1.2, 0.8), 0.05)
    V = volume_preserving_projection(DeformationField.random(rng), mesh)
    v0 = volume(mesh)
    d = [volume(flow_transport(mesh, V, t)) - v0 for t in (0.1, 0.05)]
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.05)


def test_half_disk_residual_vanishes():
    scal = []
    for h in (0.05, 0.025):
        pair = solve_first_eigenpair(mesh_domain(DomainSpec.half_disk(), h))
        res = extremality_residual(pair)
        scal.append(res.scalar)
        assert abs(res.function.mean) <= 1e-12
        assert res.mean_flux == pytest.approx(EIG.dphi1, rel=1e-3)
    assert scal[1] < scal[0] < 1e-3


def test_squashed_ellipse_residual_persists():
    vals = [extremality_residual(solve_first_eigenpair(mesh_domain(DomainSpec.half_ellipse(1.0, 0.6), h))).scalar for h in (0.1, 0.05)]
    assert min(vals) > 0.05
    assert vals[1] == pytest.approx(vals[0], rel=0.05)


def test_residual_function_matches_mode():
    # a cos(2 theta) perturbation produces a flux deviation dominated by degree 2
    v = lambda t: 0.02 * np.cos(2 * t)
    pair = solve_first_eigenpair(mesh_domain(DomainSpec.radial_graph(v), 0.05))
    energy = extremality_residual(pair).function.degree_energy()
    assert energy[2] > 0.95 * energy.sum()


def test_half_disk_contact_angles(half_disk):
    mesh, _ = half_disk
    ang = contact_angle(mesh)
    assert len(ang) == 2
    assert np.max(np.abs(ang - math.pi / 2)) < 1e-4


def _ellipse_angles(a, b, tilt):
    rho = lambda t: 1.0 / math.sqrt((math.sin(t - tilt) / a) ** 2 + (math.cos(t - tilt) / b) ** 2)
    out = []
    for t0, wall_dir, sgn in ((0.0, (0.0, -1.0), 1.0), (math.pi, (0.0, 1.0), -1.0)):
        eps = 1e-6
        drho = (rho(t0 + eps) - rho(t0 - eps)) / (2 * eps)
        d = np.array([drho * math.sin(t0) + rho(t0) * math.cos(t0), drho * math.cos(t0) - rho(t0) * math.sin(t0)]) * sgn
        out.append(math.acos(d @ wall_dir / np.linalg.norm(d)))
    return np.array(out)


@settings(max_examples=8)
@given(st.floats(0.6, 1.4), st.floats(0.6, 1.4), st.floats(-0.3, 0.3))
def test_contact_angle_ellipse_oracle(a, b, tilt):
    # h = 0.05 resolves the smallest curvature radius at the cut (0.6^2 / 1.4)
    mesh = mesh_domain(DomainSpec.half_ellipse(a, b, tilt), 0.05)
    assert np.allclose(np.sort(contact_angle(mesh)), np.sort(_ellipse_angles(a, b, tilt)), atol=5e-3)


def test_contact_angle_converges_on_eccentric_ellipse():
    a, b = 0.6, 1.4
    err = [np.max(np.abs(contact_angle(mesh_domain(DomainSpec.half_ellipse(a, b), h)) - _ellipse_angles(a, b, 0.0))) for h in (0.1, 0.05, 0.025)]
    assert err[1] < err[0] / 4 and err[2] < err[1] / 4


def test_tilted_ellipse_angle():
    ang = contact_angle(mesh_domain(DomainSpec.half_ellipse(1.0, 0.6, math.radians(10)), 0.05))
    assert np.allclose(np.sort(ang), np.sort(_ellipse_angles(1.0, 0.6, math.radians(10))), atol=1e-4)
    assert ang.min() < math.pi / 2 < ang.max()
