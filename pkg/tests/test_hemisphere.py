import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_domains import hemisphere as hs
from extremal_domains.analytic_core import quadrature_rule, radial_eigenfunction

from .oracles import mode_profile_collocation


def random_function(n, lmax, seed, zero_mean=True, decay=0.0):
    rng = np.random.default_rng(seed)
    modes = hs.admissible_modes(n, lmax)
    c = rng.normal(size=len(modes)) * np.array([math.exp(-decay * m.degree) for m in modes])
    if zero_mean:
        c[0] = 0.0
    return hs.HemisphereFunction(n, lmax, c)


@pytest.mark.parametrize("n", [1, 2])
def test_admissible_modes_even_and_counted(n):
    modes = hs.admissible_modes(n, 6)
    assert all(m.even_in_y0 for m in modes)
    assert sum(m.degree == 1 for m in modes) == n
    # evenness: values agree at (y0, y') and (-y0, y')
    rule = quadrature_rule(n)
    pts = rule.sphere_points
    flipped = pts * np.r_[-1.0, np.ones(n)]
    B = hs._eval_modes(modes, n, pts, 1.0)
    Bf = hs._eval_modes(modes, n, flipped, 1.0)
    assert np.allclose(B, Bf, atol=1e-13)


@pytest.mark.parametrize("n", [1, 2])
def test_basis_orthonormal_on_hemisphere(n):
    rule = hs._projection_rule(n, 8)
    B = hs.basis_matrix(n, 8, rule.sphere_points)
    G = B.T @ (rule.sphere_weights[:, None] * B)
    assert np.allclose(G, np.eye(G.shape[0]), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_degree_one_modes_are_linear(n):
    rule = quadrature_rule(n)
    for j, vec in enumerate(hs.kernel_basis(n, 8)):
        vals = vec(rule.sphere_points)
        target = rule.sphere_points[:, j + 1]
        assert np.allclose(vals * hs._linear_scale(n), target, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_symmetrize_roundtrip_and_examples(n):
    assert np.all(hs.restrict(hs.symmetrize(hs.HemisphereFunction.zeros(n, 8))).coeffs == 0)
    f = random_function(n, 8, seed=3)
    back = hs.restrict(hs.symmetrize(f))
    assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-14
    a = np.r_[0.0, np.arange(1, n + 1)]
    lin = hs.HemisphereFunction.linear(a, 8)
    w = hs.symmetrize(lin)
    pts = np.random.default_rng(0).normal(size=(50, n + 1))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    assert np.allclose(w(pts), pts @ a, atol=1e-12)
    assert abs(hs.symmetrize(f).mean) < 1e-14


@pytest.mark.parametrize("d", [2, 3])
def test_mu1_vanishes(d):
    assert abs(hs.l0_eigenvalue(1, radial_eigenfunction(d))) <= 1e-10


def test_interior_extension_mode_ode_d2():
    eig = radial_eigenfunction(2)
    prof = hs.interior_extension(1, eig)
    r = np.linspace(0.05, 1.0, 40)
    h = 1e-4
    f = prof(r)
    fp = (prof(r + h) - prof(r - h)) / (2 * h)
    fpp = (prof(r + h) - 2 * f + prof(r - h)) / h**2
    assert np.max(np.abs(fpp + fp / r - f / r**2 + eig.lambda1 * f)) <= 1e-6
    assert np.max(np.abs(prof.second_derivative(r) + prof.derivative(r) / r - f / r**2 + eig.lambda1 * f)) <= 1e-10
    assert abs(prof(np.array([1.0]))[0] + eig.dphi1) <= 1e-12


def test_interior_extension_l3_d3_collocation():
    eig = radial_eigenfunction(3)
    prof = hs.interior_extension(3, eig)
    _, _, (r, f) = mode_profile_collocation(3, 3, eig.lambda1, -eig.dphi1)
    assert np.allclose(prof(r), f, atol=1e-8)


def test_interior_extension_rejects_constant_mode():
    with pytest.raises(ValueError):
        hs.interior_extension(0, radial_eigenfunction(2))


@pytest.mark.parametrize("d,l", [(2, 2), (2, 5), (3, 2), (3, 4)])
def test_mu_against_collocation(d, l):
    # stands in for a Steklov-type solve: f'(1) from an independent ODE solver
    eig = radial_eigenfunction(d)
    _, dfb, _ = mode_profile_collocation(l, d, eig.lambda1, -eig.dphi1)
    assert hs.l0_eigenvalue(l, eig) == pytest.approx(dfb + eig.d2phi1, abs=1e-6)


def test_mu_table_monotone_and_positive():
    for d in (2, 3):
        mu = hs.l0_eigenvalues(radial_eigenfunction(d), 12)
        assert np.all(np.diff(mu[2:]) > 0)
        assert np.all(mu[2:] > 0)


def test_mu_closed_form():
    from scipy import special

    for d in (2, 3):
        eig = radial_eigenfunction(d)
        for l in range(1, 10):
            q = special.jv(l + eig.nu + 1, eig.k) / special.jv(l + eig.nu, eig.k)
            assert hs.l0_eigenvalue(l, eig) == pytest.approx(-eig.dphi1 * (l + d - 1 - eig.k * q), abs=1e-11)


@pytest.mark.parametrize("n", [1, 2])
def test_apply_L0_examples(n):
    eig = radial_eigenfunction(n + 1)
    for vec in hs.kernel_basis(n, 8):
        assert np.allclose(hs.apply_L0(vec, eig).coeffs, 0.0, atol=1e-10)
    mode2 = hs.HarmonicMode(2, 0)
    v = hs.HemisphereFunction.mode(n, 8, mode2, 0.3)
    out = hs.apply_L0(v, eig)
    assert np.allclose(out.coeffs, hs.l0_eigenvalue(2, eig) * v.coeffs, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2])
@given(seed=st.integers(0, 10_000))
def test_L0_self_adjoint_by_quadrature(n, seed):
    eig = radial_eigenfunction(n + 1)
    u = random_function(n, 8, seed, decay=3.0)
    v = random_function(n, 8, seed + 1, decay=3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", hs.TruncationWarning)
        Lu, Lv = hs.apply_L0(u, eig), hs.apply_L0(v, eig)
    rule = hs._projection_rule(n, 8)
    pts, w = rule.sphere_points, rule.sphere_weights
    lhs = np.dot(w, Lu(pts) * v(pts))
    rhs = np.dot(w, u(pts) * Lv(pts))
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(lhs)))


def test_apply_L0_warns_on_truncation_and_rejects_mean():
    eig = radial_eigenfunction(2)
    v = hs.HemisphereFunction.mode(1, 8, hs.HarmonicMode(8, 0))
    with pytest.warns(hs.TruncationWarning):
        hs.apply_L0(v, eig)
    with pytest.raises(ValueError):
        hs.apply_L0(hs.HemisphereFunction.mode(1, 8, hs.HarmonicMode(0, 0)), eig)


@pytest.mark.parametrize("n", [1, 2])
def test_kernel_projection(n):
    a = np.r_[0.0, np.linspace(1, 2, n)]
    lin = hs.HemisphereFunction.linear(a, 8)
    k, perp = hs.kernel_projection(lin)
    assert np.allclose(k.coeffs, lin.coeffs) and np.all(perp.coeffs == 0)
    high = random_function(n, 8, 5)
    high = hs.HemisphereFunction(n, 8, np.where(high.degrees() >= 2, high.coeffs, 0.0))
    k, perp = hs.kernel_projection(high)
    assert np.all(k.coeffs == 0) and np.allclose(perp.coeffs, high.coeffs)
    f = random_function(n, 8, 7, zero_mean=False)
    k, perp = hs.kernel_projection(f)
    assert np.max(np.abs((k + perp).coeffs - f.coeffs)) <= 1e-14
    k2, perp2 = hs.kernel_projection(k)
    assert np.allclose(k2.coeffs, k.coeffs) and np.all(perp2.coeffs == 0)
    for b in hs.kernel_basis(n, 8):
        assert abs(perp.inner(b)) < 1e-14


@pytest.mark.parametrize("n", [1, 2])
def test_L0_invertible_on_K_perp(n):
    eig = radial_eigenfunction(n + 1)
    mu = hs.l0_eigenvalues(eig, 32)
    assert np.min(np.abs(mu[2:])) > 0
    f = random_function(n, 8, 11)
    _, perp = hs.kernel_projection(f)
    w = hs.solve_L0(perp, eig)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", hs.TruncationWarning)
        back = hs.apply_L0(w, eig)
    assert np.max(np.abs(back.coeffs - perp.coeffs)) <= 1e-10
    with pytest.raises(ValueError):
        hs.solve_L0(f, eig)


@pytest.mark.parametrize("n", [1, 2])
def test_symmetrized_L0_matches_whole_sphere_operator(n):
    eig = radial_eigenfunction(n + 1)
    v = random_function(n, 6, 13, decay=1.0)
    whole = hs.whole_sphere_L0(hs.symmetrize(v), eig)
    via_sphere = hs.restrict(whole, n, 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", hs.TruncationWarning)
        direct = hs.apply_L0(v, eig)
    assert np.max(np.abs(via_sphere.coeffs - direct.coeffs)) <= 1e-8


def test_mode_table_csv():
    text = hs.mode_table_csv(radial_eigenfunction(2), 8)
    lines = text.strip().splitlines()
    assert lines[0] == "d,l,mu,multiplicity"
    assert len(lines) == 9
    assert abs(float(lines[1].split(",")[2])) < 1e-10


@pytest.mark.parametrize("n", [1, 2])
def test_from_function_mean(n):
    f = hs.HemisphereFunction.from_function(n, 8, lambda p: 1.0 + p[:, 0] ** 2)
    rule = quadrature_rule(n)
    exact = np.dot(rule.sphere_weights, 1.0 + rule.sphere_points[:, 0] ** 2) / rule.sphere_weights.sum()
    assert f.mean == pytest.approx(exact, abs=1e-12)
    assert abs(f.without_mean().mean) < 1e-15
