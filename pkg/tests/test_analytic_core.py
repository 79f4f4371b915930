import math
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from extremal_domains import analytic_core as ac

GOLDEN = Path(ac.__file__).parent / "data" / "golden_v1.txt"


def j0_series(x, terms=60):
    # truncated power series, independent of scipy
    return math.fsum((-1) ** m * (x / 2) ** (2 * m) / math.factorial(m) ** 2 for m in range(terms))


def bisect(f, a, b, tol=1e-15):
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm * fa > 0:
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def golden_rows():
    rows = {}
    for line in GOLDEN.read_text().splitlines():
        if line.startswith("#"):
            continue
        d, *vals = line.split()
        rows[int(d)] = [float(v) for v in vals]
    return rows


def test_bessel_trivial_values():
    assert ac.bessel_j(0, 0.0) == 1.0
    assert ac.bessel_j(1, 0.0) == 0.0


def test_bessel_zero_of_series_oracle():
    root = bisect(j0_series, 2.0, 3.0)
    assert abs(ac.bessel_j(0, root)) < 1e-12
    assert abs(ac.bessel_j(0, 2.404825557695773)) < 1e-12


@pytest.mark.parametrize("order", [0.0, 0.5, 1.0, 2.5, 7.0])
def test_bessel_against_mpmath(order):
    x = np.linspace(0.0, 50.0, 201)
    ref = np.array([float(mp.besselj(order, xi)) for xi in x])
    got = ac.bessel_j(order, x)
    scale = np.maximum(np.abs(ref), 1e-3)
    assert np.max(np.abs(got - ref) / scale) < 1e-12


def test_bessel_rejects_negative_argument():
    with pytest.raises(ValueError):
        ac.bessel_j(0, -1.0)
    with pytest.raises(ValueError):
        ac.bessel_j(0, np.array([1.0, -0.5]))


def test_first_zero_examples():
    assert ac.first_bessel_zero(0) == pytest.approx(bisect(j0_series, 2.0, 3.0), abs=1e-13)
    assert ac.first_bessel_zero(0.5) == pytest.approx(math.pi, abs=1e-13)
    j1 = lambda x: float(mp.besselj(1, x))
    assert ac.first_bessel_zero(1) == pytest.approx(bisect(j1, 3.5, 4.0), abs=1e-13)
    assert ac.first_bessel_zero(1) == pytest.approx(3.8317059702, abs=1e-10)


def test_first_zero_monotone():
    zeros = [ac.first_bessel_zero(nu) for nu in np.arange(0, 5.01, 0.5)]
    assert np.all(np.diff(zeros) > 0)


@given(st.floats(0.0, 20.0))
def test_first_zero_matches_mpmath(order):
    assert ac.first_bessel_zero(order) == pytest.approx(float(mp.besseljzero(order, 1)), abs=1e-12)


def test_first_zero_rejects_out_of_range():
    with pytest.raises(ValueError):
        ac.first_bessel_zero(21)


@pytest.mark.parametrize("d", ac.SUPPORTED_DIMENSIONS)
def test_eigenfunction_invariants(d):
    eig = ac.radial_eigenfunction(d)
    r = np.linspace(1e-3, 1.0, 100)
    assert np.max(np.abs(eig.residual(r))) <= 1e-10
    assert abs(eig.phi(np.array([1.0]))[0]) < 1e-12
    assert np.all(eig.phi(np.linspace(0, 0.999, 200)) > 0)
    assert eig.dphi1 < 0
    assert abs(eig.normalization["half_ball_l2_squared"] - 1) <= 1e-10
    assert eig.normalization["whole_ball_l2_squared"] == pytest.approx(2.0, abs=2e-10)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_normalization_by_adaptive_quadrature(d):
    eig = ac.radial_eigenfunction(d)
    val, _ = integrate.quad(lambda r: eig.phi(np.array([r]))[0] ** 2 * r ** (d - 1), 0, 1, epsabs=1e-14, epsrel=1e-13)
    assert ac.hemisphere_area(d - 1) * val == pytest.approx(1.0, abs=1e-10)


def test_eigenvalue_examples():
    assert ac.radial_eigenfunction(2).lambda1 == pytest.approx(bisect(j0_series, 2.0, 3.0) ** 2, abs=1e-12)
    assert ac.radial_eigenfunction(3).lambda1 == pytest.approx(math.pi**2, abs=1e-12)


def test_d3_profile_is_sinc():
    # sin(pi r)/r on the unit ball, normalised to unit mass on the half-ball
    eig = ac.radial_eigenfunction(3)
    r = np.linspace(0.01, 1, 50)
    c = 1 / math.sqrt(2 * math.pi * 0.5)
    assert np.allclose(eig.phi(r), c * np.sin(math.pi * r) / r, atol=1e-13)


def test_derivatives_regular_at_origin():
    for d in ac.SUPPORTED_DIMENSIONS:
        eig = ac.radial_eigenfunction(d)
        assert eig.dphi(np.array([0.0]))[0] == 0.0
        assert np.isfinite(eig.d2phi(np.array([0.0]))[0])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_derivatives_against_finite_differences(d):
    eig = ac.radial_eigenfunction(d)
    r = np.linspace(0.05, 0.95, 19)
    h = 1e-5
    fd1 = (eig.phi(r + h) - eig.phi(r - h)) / (2 * h)
    fd2 = (eig.dphi(r + h) - eig.dphi(r - h)) / (2 * h)
    assert np.allclose(eig.dphi(r), fd1, atol=1e-9)
    assert np.allclose(eig.d2phi(r), fd2, atol=1e-9)


def test_dphi1_d2_value_and_pohozaev():
    eig = ac.radial_eigenfunction(2)
    # c * j01 * J1(j01) with c from quadrature normalisation
    k = ac.first_bessel_zero(0)
    val, _ = integrate.quad(lambda r: float(mp.besselj(0, k * r)) ** 2 * r, 0, 1, epsabs=1e-14)
    c = 1 / math.sqrt(math.pi * val)
    assert eig.dphi1 == pytest.approx(-c * k * float(mp.besselj(1, k)), abs=1e-12)
    assert eig.dphi1 == pytest.approx(-1.9190, abs=5e-4)
    assert math.pi * eig.dphi1**2 == pytest.approx(2 * eig.lambda1, rel=1e-12)


def test_hemisphere_moment_examples():
    assert ac.hemisphere_moment((1, 2)) == pytest.approx(2 / 3, abs=1e-12)
    assert ac.hemisphere_moment((0, 1)) == 0.0
    assert ac.hemisphere_moment((0, 1, 1)) == 0.0
    assert ac.hemisphere_moment((0, 0)) == pytest.approx(math.pi, abs=1e-12)
    assert ac.hemisphere_moment((0, 0, 0)) == pytest.approx(2 * math.pi, abs=1e-12)


@given(st.lists(st.integers(0, 6), min_size=2, max_size=3))
def test_hemisphere_moment_matches_quadrature(exps):
    n = len(exps) - 1
    rule = ac.quadrature_rule(n, 48)
    vals = np.prod(rule.sphere_points ** np.array(exps), axis=1)
    assert ac.hemisphere_moment(exps) == pytest.approx(rule.integrate_sphere(vals), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_quadrature_rule_invariants(n):
    rule = ac.quadrature_rule(n)
    assert rule.degree >= 40
    assert np.all(rule.sphere_weights > 0) and np.all(rule.radial_weights > 0)
    assert rule.sphere_weights.sum() == pytest.approx(ac.hemisphere_area(n), abs=1e-12)
    assert rule.integrate_ball(lambda p: np.ones(len(p))) == pytest.approx(ac.half_ball_volume(n + 1), abs=1e-12)
    with pytest.raises(ValueError):
        ac.quadrature_rule(n, 20)


def test_constant_C_golden_and_sign():
    rows = golden_rows()
    for d, (lam, dphi1, C, trans) in rows.items():
        eig = ac.radial_eigenfunction(d)
        assert eig.lambda1 == pytest.approx(lam, rel=1e-12)
        assert eig.dphi1 == pytest.approx(dphi1, rel=1e-12)
        assert ac.constant_C(d) == pytest.approx(C, rel=1e-10)
        assert ac.translation_constant(d) == pytest.approx(trans, rel=1e-10)
    for d in ac.SUPPORTED_DIMENSIONS:
        assert ac.constant_C(d) > 0


def test_constant_C_scales_linearly_with_normalization():
    eig = ac.radial_eigenfunction(2)
    moment = ac.hemisphere_moment((1, 2))

    def c_of(s):
        val, _ = integrate.quad(lambda r: r * (s * eig.dphi(np.array([r]))[0]) ** 2 * r, 0, 1, epsabs=1e-14)
        return -2 * moment * math.pi * val / (s * eig.dphi1)

    assert c_of(1.0) == pytest.approx(ac.constant_C(2), rel=1e-10)
    assert c_of(1.7) == pytest.approx(1.7 * ac.constant_C(2), rel=1e-10)


def test_first_order_shift_identity():
    # the metric and volume terms collapse to -2 * moment * int phi'^2 r^(n+1)
    for d in (2, 3, 4):
        eig = ac.radial_eigenfunction(d)
        n = d - 1
        i1, _ = integrate.quad(lambda r: eig.dphi(np.array([r]))[0] ** 2 * r ** (n + 1), 0, 1, epsabs=1e-14)
        m = ac.hemisphere_moment([1, 2] + [0] * (n - 1))
        assert ac.first_order_shift(d) == pytest.approx(-2 * m * i1, rel=1e-10)


def test_radial_eigenfunction_rejects_bad_dimension():
    with pytest.raises(ValueError):
        ac.radial_eigenfunction(1)
    with pytest.raises(ValueError):
        ac.radial_eigenfunction(9)
