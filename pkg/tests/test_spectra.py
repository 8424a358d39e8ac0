"""Eigen-systems of the interval, rectangle and disk."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from postincident.errors import (
    InsufficientModes,
    InvalidDomain,
    NotOnBoundary,
    PointOutsideDomain,
    UnsupportedCount,
    UnsupportedDomain,
)
from postincident.sources import ModeCombination, Polynomial, Product1D, SmoothBump
from postincident.spectra import (
    Disk,
    Interval,
    Rectangle,
    disk_table_capacity,
    eigenfunction_laplacian,
    eigenfunction_normal_derivative,
    eigenfunction_value,
    enumerate_spectrum,
    project,
    weyl_stats,
)

PI2 = math.pi**2


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def test_interval_dirichlet_first_three():
    s = enumerate_spectrum(Interval(1.0), 3)
    np.testing.assert_allclose(s.eigenvalues, [PI2, 4 * PI2, 9 * PI2], rtol=1e-15)
    assert list(s.multiplicities) == [1, 1, 1]


def test_interval_neumann_has_zero_mode():
    s = enumerate_spectrum(Interval(2.0, "neumann"), 4)
    np.testing.assert_allclose(s.eigenvalues, [0.0, PI2 / 4, PI2, 9 * PI2 / 4], atol=1e-14)


def test_square_first_two_modes():
    s = enumerate_spectrum(Rectangle(1.0, 1.0, Fraction(1)), 2)
    np.testing.assert_allclose(s.eigenvalues, [2 * PI2, 5 * PI2], rtol=1e-14)
    assert s.modes[0].descriptors == ((1, 1),)
    assert set(s.modes[1].descriptors) == {(1, 2), (2, 1)}


def test_disk_first_two_modes():
    s = enumerate_spectrum(Disk(), 2)
    assert s.eigenvalues[0] == pytest.approx(2.404825557695773**2, rel=1e-12)
    assert s.eigenvalues[1] == pytest.approx(3.831705970207512**2, rel=1e-12)
    assert list(s.multiplicities) == [1, 2]


def test_disk_zeros_match_scipy():
    s = enumerate_spectrum(Disk(), 40)
    for mode in s.modes:
        m, k, _ = mode.descriptors[0]
        ref = special.jn_zeros(m, k)[-1]
        assert math.sqrt(mode.eigenvalue) == pytest.approx(ref, rel=1e-12)


def test_disk_table_exhausted():
    with pytest.raises(UnsupportedCount):
        enumerate_spectrum(Disk(), disk_table_capacity() + 1)


@pytest.mark.parametrize(
    "make",
    [lambda: Interval(0.0), lambda: Interval(-1.0), lambda: Rectangle(1.0, 0.0), lambda: Interval(1.0, "robin")],
)
def test_invalid_domains(make):
    with pytest.raises(InvalidDomain):
        make()


def test_declared_aspect_must_match_lengths():
    with pytest.raises(InvalidDomain):
        Rectangle(1.0, 2.0, Fraction(1, 2))
    Rectangle(1.0, 2.0, Fraction(1, 4))


@pytest.mark.parametrize(
    "domain",
    [Interval(1.0), Interval(3.0, "neumann"), Rectangle(1.0, 2.0, Fraction(1, 4)), Rectangle(1.0, 2**0.25), Disk()],
)
def test_spectrum_structure(domain):
    s = enumerate_spectrum(domain, 40)
    lam, sigma = s.eigenvalues, s.sigma
    assert np.all(np.diff(lam) > 0)
    assert all(m.multiplicity == len(m.descriptors) for m in s.modes)
    assert np.all(np.diff(sigma) >= 0)
    counting = s.counting
    assert np.all(np.diff(counting) == s.multiplicities[1:])
    # sigma_j <= lambda_j: the repeated list never runs ahead of the distinct list
    assert np.all(sigma[: len(lam)] <= lam)
    if domain.dim == 1:
        assert np.all(s.multiplicities == 1)


def test_rational_rectangle_grouping_matches_brute_force():
    l1, l2 = 1.0, 2.0
    s = enumerate_spectrum(Rectangle(l1, l2, Fraction(1, 4)), 60)
    M = 40
    groups = {}
    for m1 in range(1, M + 1):
        for m2 in range(1, M + 1):
            key = 4 * m1 * m1 + m2 * m2  # q m1^2 + p m2^2 with l1^2/l2^2 = 1/4
            groups.setdefault(key, set()).add((m1, m2))
    # any eigenvalue below (M + 1)^2 (in units of pi^2 / 4) only uses m1, m2 <= M
    safe = (M + 1) ** 2
    keys = sorted(k for k in groups if k < safe)
    for mode, key in zip(s.modes, keys):
        assert mode.eigenvalue == pytest.approx(key * PI2 / 4, rel=1e-13)
        assert set(mode.descriptors) == groups[key]


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------


def test_interval_values():
    s = enumerate_spectrum(Interval(1.0), 3)
    assert eigenfunction_value(s, 1, 0.5) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert abs(eigenfunction_value(s, 2, 0.5)) < 1e-15


def test_rectangle_value_at_center():
    s = enumerate_spectrum(Rectangle(1.0, 2.0 ** 0.5), 3)
    # (2 / sqrt(l1 l2)) sin(pi/2) sin(pi/2)
    expected = 2 / math.sqrt(2.0**0.5)
    assert eigenfunction_value(s, (1, 1), (0.5, 2.0**0.5 / 2)) == pytest.approx(expected, rel=1e-14)


def test_rectangle_value_l2_equals_2():
    s = enumerate_spectrum(Rectangle(1.0, 2.0, Fraction(1, 4)), 3)
    assert eigenfunction_value(s, (1, 1), (0.5, 1.0)) == pytest.approx(2 / math.sqrt(2), rel=1e-14)


def test_point_outside_domain():
    s = enumerate_spectrum(Interval(1.0), 3)
    with pytest.raises(PointOutsideDomain):
        eigenfunction_value(s, 1, 1.5)


def test_normal_derivatives_interval():
    s = enumerate_spectrum(Interval(1.0), 3)
    # outward normal is -1 at x = 0
    assert eigenfunction_normal_derivative(s, 1, 0.0) == pytest.approx(-math.sqrt(2) * math.pi, rel=1e-14)
    assert eigenfunction_normal_derivative(s, 2, 1.0) == pytest.approx(2 * math.sqrt(2) * math.pi, rel=1e-14)


def test_normal_derivative_square():
    s = enumerate_spectrum(Rectangle(1.0, 1.0, Fraction(1)), 3)
    assert eigenfunction_normal_derivative(s, (1, 1), (0.0, 0.5)) == pytest.approx(-2 * math.pi, rel=1e-14)


def test_normal_derivative_errors():
    s = enumerate_spectrum(Interval(1.0), 3)
    with pytest.raises(NotOnBoundary):
        eigenfunction_normal_derivative(s, 1, 0.3)
    with pytest.raises(UnsupportedDomain):
        eigenfunction_normal_derivative(enumerate_spectrum(Disk(), 3), (0, 1, "cos"), (1.0, 0.0))


@pytest.mark.parametrize("domain", [Interval(1.3), Interval(1.0, "neumann"), Rectangle(1.0, 2**0.25)])
def test_eigen_equation_residual(domain):
    s = enumerate_spectrum(domain, 12)
    rng = np.random.default_rng(7)
    for mode in s.modes:
        for desc in mode.descriptors:
            for _ in range(25):
                if domain.dim == 1:
                    x = rng.uniform(0, domain.length)
                else:
                    x = (rng.uniform(0, domain.l1), rng.uniform(0, domain.l2))
                lap = eigenfunction_laplacian(s, desc, x)
                val = eigenfunction_value(s, desc, x)
                assert abs(lap + mode.eigenvalue * val) < 1e-10 * max(mode.eigenvalue, 1.0)


def test_gram_matrix_interval():
    s = enumerate_spectrum(Interval(1.0), 10)
    x, w = np.polynomial.legendre.leggauss(200)
    x, w = 0.5 * (x + 1), 0.5 * w
    phi = np.array([[eigenfunction_value(s, n, xi) for xi in x] for n in range(1, 11)])
    np.testing.assert_allclose(phi * w @ phi.T, np.eye(10), atol=1e-8)


def test_gram_matrix_rectangle():
    s = enumerate_spectrum(Rectangle(1.0, 2**0.25), 10)
    descs = [d for _, d, _ in s.repeated()][:10]
    g, gw = np.polynomial.legendre.leggauss(60)
    X, Y = np.meshgrid(0.5 * (g + 1), 0.5 * 2**0.25 * (g + 1), indexing="ij")
    W = np.outer(0.5 * gw, 0.5 * 2**0.25 * gw).ravel()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    phi = np.array([[eigenfunction_value(s, d, p) for p in pts] for d in descs])
    np.testing.assert_allclose(phi * W @ phi.T, np.eye(10), atol=1e-8)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def test_project_single_mode():
    s = enumerate_spectrum(Interval(1.0), 8)
    pc = project(s, ModeCombination.of(Interval(1.0), {1: 1.0}), 8)
    c = pc.flat()
    assert c[0] == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(c[1:])) < 1e-12


def test_project_parabola_closed_form():
    s = enumerate_spectrum(Interval(1.0), 20)
    pc = project(s, Polynomial((0.0, 1.0, -1.0)), 20)
    n = np.arange(1, 21)
    expected = math.sqrt(2) * 2 * (1 - (-1.0) ** n) / (n * math.pi) ** 3
    np.testing.assert_allclose(pc.flat(), expected, atol=1e-13)


def test_project_matches_quad():
    s = enumerate_spectrum(Interval(1.0), 6)
    f = SmoothBump((0.37,), 0.25)
    pc = project(s, f, 6)
    for n, c in enumerate(pc.flat(), start=1):
        ref = integrate.quad(lambda x: f(x)[0] * math.sqrt(2) * math.sin(n * math.pi * x), 0.12, 0.62, epsabs=1e-14)[0]
        assert c == pytest.approx(ref, abs=1e-12)


def test_point_values_are_projection_sums():
    s = enumerate_spectrum(Rectangle(1.0, 1.0, Fraction(1)), 6)
    f = Product1D((SmoothBump((0.4,), 0.3), SmoothBump((0.55,), 0.3)))
    x0 = (0.3, 0.7)
    pc = project(s, f, 6, point=x0)
    for mode, coefs, pv in zip(s.modes, pc.coefficients, pc.point_values):
        direct = sum(c * eigenfunction_value(s, d, x0) for c, d in zip(coefs, mode.descriptors))
        assert pv == pytest.approx(direct, abs=1e-14)


def test_irrational_rectangle_visible_whenever_nonzero():
    l2 = 2**0.25
    s = enumerate_spectrum(Rectangle(1.0, l2), 30)
    f = Product1D((SmoothBump((0.45,), 0.3), SmoothBump((0.55 * l2,), 0.3 * l2)))
    x0 = (1 / math.sqrt(2), l2 * (math.sqrt(5) - 1) / 2)
    pc = project(s, f, 30, point=x0)
    nonzero = pc.norms() > 1e-10 * pc.norms().max()
    assert np.all(np.abs(pc.point_values[nonzero]) > 0)


def test_parseval():
    s = enumerate_spectrum(Interval(1.0), 256)
    f = SmoothBump((0.4,), 0.3)
    pc = project(s, f, 256)
    norm2 = integrate.quad(lambda x: f(x)[0] ** 2, 0.1, 0.7, epsabs=1e-14)[0]
    assert np.sum(pc.flat() ** 2) <= norm2 + 1e-10
    assert np.sum(pc.flat() ** 2) == pytest.approx(norm2, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(coefs=st.lists(st.floats(-2, 2), min_size=1, max_size=5))
def test_projection_of_mode_combination_recovers_coefficients(coefs):
    dom = Interval(1.0)
    s = enumerate_spectrum(dom, 8)
    f = ModeCombination.of(dom, {n: c for n, c in enumerate(coefs, start=1)})
    got = project(s, f, 8).flat()[: len(coefs)]
    np.testing.assert_allclose(got, coefs, atol=1e-11)


# ---------------------------------------------------------------------------
# Weyl statistics
# ---------------------------------------------------------------------------


def test_weyl_interval():
    r = weyl_stats(enumerate_spectrum(Interval(1.0), 64))
    assert r.density_tail == pytest.approx(1 / math.pi, rel=1e-12)
    assert r.density_trend == "flat"
    assert r.expected_exponent == 2.0
    assert r.rho0 == pytest.approx(PI2, rel=1e-12)


def test_weyl_disk_multiplicities():
    s = enumerate_spectrum(Disk(), 120)
    r = weyl_stats(s)
    # every Bessel order m >= 1 is doubly degenerate
    assert set(s.multiplicities.tolist()) == {1, 2}
    assert r.limit_positive
    assert r.expected_exponent == 1.0


def test_weyl_square_unbounded_multiplicity():
    r = weyl_stats(enumerate_spectrum(Rectangle(1.0, 1.0, Fraction(1)), 200))
    assert r.multiplicity_unbounded


def test_weyl_needs_modes():
    with pytest.raises(InsufficientModes):
        weyl_stats(enumerate_spectrum(Interval(1.0), 5))
