import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from sphaera.harmonics import (
    FOUR_PI,
    FieldMap,
    HarmonicCoefficients,
    SphereGrid,
    SpherePoint,
    addition_sum,
    analyze,
    eigenvalue,
    legendre_all,
    legendre_poly,
    spectral_laplacian,
    sph_harm,
    synthesize,
    ylm_table,
)

points = st.builds(
    SpherePoint,
    st.floats(0, math.pi, allow_nan=False),
    st.floats(-10, 10, allow_nan=False),
)


@pytest.mark.parametrize("l,mu", [(0, 0), (1, 2), (2, 6)])
def test_eigenvalue(l, mu):
    assert eigenvalue(l) == mu


@pytest.mark.parametrize("l,z,want", [(0, 0.3, 1.0), (1, 0.7, 0.7), (2, 0.5, -0.125)])
def test_legendre_examples(l, z, want):
    assert legendre_poly(l, z) == pytest.approx(want, abs=1e-15)


def test_legendre_against_mpmath():
    z = np.linspace(-1, 1, 37)
    Q = legendre_all(30, z)
    for l in (3, 11, 30):
        ref = np.array([float(mpmath.legendre(l, zi)) for zi in z])
        assert np.max(np.abs(Q[l] - ref)) < 1e-13


def test_legendre_bound_and_endpoint():
    z = np.linspace(-1, 1, 10_000)
    Q = legendre_all(200, z)
    assert np.max(np.abs(Q)) <= 1 + 1e-12
    assert np.allclose(Q[:, -1], 1.0, atol=1e-12)


def test_legendre_domain():
    assert legendre_poly(3, 1 + 5e-13) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        legendre_poly(3, 1.001)


def test_sph_harm_examples():
    p = SpherePoint(1.1, 2.3)
    assert sph_harm(0, 0, p) == pytest.approx(0.2820947918, abs=1e-10)
    assert sph_harm(3, 2, 0.0, 0.4) == 0
    assert sph_harm(5, -3, p) == pytest.approx(-np.conj(sph_harm(5, 3, p)), abs=1e-13)
    with pytest.raises(ValueError):
        sph_harm(2, 3, p)


def test_sph_harm_north_pole():
    for l in range(8):
        assert sph_harm(l, 0, 0.0, 0.0) == pytest.approx(math.sqrt((2 * l + 1) / FOUR_PI))


def test_sph_harm_against_mpmath():
    rng = np.random.default_rng(3)
    for l, m in [(2, 1), (7, -4), (12, 12), (20, 5), (40, 33)]:
        th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        ref = complex(mpmath.spherharm(l, m, th, ph))
        assert abs(sph_harm(l, m, th, ph) - ref) < 1e-12


def test_normalized_recurrence_high_degree():
    # no factorial overflow: sectoral and near-sectoral terms stay finite and bounded
    Y = ylm_table(1000, np.array([0.3, 1.5, 2.9]), np.zeros(3))
    assert np.all(np.isfinite(Y))
    assert np.max(np.abs(Y)) < math.sqrt(2001 / FOUR_PI)


@given(points, points)
@example(SpherePoint(1.0, 0.0), SpherePoint(1e-10, 0.0))
@settings(max_examples=50, deadline=None)
def test_addition_formula(x, y):
    Q = legendre_all(16, x.inner(y))
    for l in range(17):
        scale = (2 * l + 1) / FOUR_PI
        assert abs(addition_sum(l, x, y) - scale * Q[l]) <= 1e-11 * scale


def test_addition_examples():
    x = SpherePoint(0.4, 1.0)
    y = SpherePoint(x.theta + math.pi / 3, 1.0)
    assert x.inner(y) == pytest.approx(0.5)
    assert addition_sum(5, x, x) == pytest.approx(11 / FOUR_PI, rel=1e-13)
    assert addition_sum(0, x, y) == pytest.approx(1 / FOUR_PI, rel=1e-13)
    # independent route: mpmath harmonics summed over m
    direct = sum(complex(mpmath.spherharm(4, m, x.theta, x.phi) * mpmath.conj(mpmath.spherharm(4, m, y.theta, y.phi)))
                 for m in range(-4, 5))
    assert abs(direct.imag) < 1e-12
    assert addition_sum(4, x, y) == pytest.approx(direct.real, rel=1e-12)
    assert direct.real == pytest.approx(9 / FOUR_PI * legendre_poly(4, 0.5), rel=1e-12)


@given(points, points)
@settings(max_examples=30, deadline=None)
def test_inner_product_range(x, y):
    assert -1 <= x.inner(y) <= 1
    assert x.inner(x) == pytest.approx(1.0)


def test_sphere_point_validation():
    assert SpherePoint(1.0, -0.5).phi == pytest.approx(2 * math.pi - 0.5)
    with pytest.raises(ValueError):
        SpherePoint(-0.1, 0.0)
    v = np.array([1.0, 2.0, -0.5])
    p = SpherePoint.from_cartesian(v)
    assert np.allclose(p.cartesian(), v / np.linalg.norm(v))


def test_grid_measure_and_exactness():
    g = SphereGrid.gauss_legendre(32)
    assert g.cell_weights().sum() == pytest.approx(FOUR_PI, rel=1e-12)
    assert g.bandlimit == 32
    with pytest.raises(ValueError):
        SphereGrid.gauss_legendre(8, ntheta=8)


def test_orthonormality():
    L = 16
    g = SphereGrid.gauss_legendre(32)
    th, ph = g.mesh()
    Y = ylm_table(L, th.ravel(), ph.ravel())
    cols = [(-1) ** m * np.conj(Y[:, l, -m]) if m < 0 else Y[:, l, m]
            for l in range(L + 1) for m in range(-l, l + 1)]
    F = np.array(cols).T
    gram = (F.conj().T * g.cell_weights().ravel()) @ F
    assert np.max(np.abs(gram - np.eye(len(cols)))) < 1e-10


def test_reproducing_kernel_mixed_degrees():
    g = SphereGrid.gauss_legendre(22)
    zt, zp = g.mesh()
    from sphaera.harmonics import to_cartesian

    zv = to_cartesian(zt, zp)
    x, y = SpherePoint(0.3, 0.2), SpherePoint(2.0, 4.0)
    Qx = legendre_all(10, np.clip(zv @ x.cartesian(), -1, 1))
    Qy = legendre_all(10, np.clip(zv @ y.cartesian(), -1, 1))
    Qxy = legendre_all(10, x.inner(y))
    w = g.cell_weights()
    for l in range(11):
        for lp in range(11):
            got = np.sum(w * Qx[l] * Qy[lp])
            want = FOUR_PI / (2 * l + 1) * Qxy[l] if l == lp else 0.0
            assert abs(got - want) < 1e-9


def test_analyze_single_mode():
    g = SphereGrid.gauss_legendre(6)
    c = HarmonicCoefficients.single_mode(6, 2, 1, 1.0)
    # a_{2,-1} is implied, so the map is real
    back = analyze(synthesize(c, g))
    expect = np.zeros((7, 7), complex)
    expect[2, 1] = 1.0
    assert np.max(np.abs(back.values - expect)) < 1e-10


def test_analyze_constant():
    g = SphereGrid.gauss_legendre(8)
    back = analyze(FieldMap(g, np.full(g.shape, 2.5)))
    assert back[0, 0] == pytest.approx(2.5 * math.sqrt(FOUR_PI))
    rest = back.values.copy()
    rest[0, 0] = 0
    assert np.max(np.abs(rest)) < 1e-10


def test_analyze_requires_resolution():
    g = SphereGrid.gauss_legendre(4)
    with pytest.raises(ValueError):
        analyze(FieldMap(g, np.zeros(g.shape)), L=5)


def test_synthesize_examples():
    g = SphereGrid.gauss_legendre(4)
    assert np.all(synthesize(HarmonicCoefficients.zeros(4), g).values == 0)
    c = HarmonicCoefficients.single_mode(4, 0, 0, math.sqrt(FOUR_PI))
    assert np.allclose(synthesize(c, g).values, 1.0, atol=1e-14)
    th, _ = g.mesh()
    y10 = synthesize(HarmonicCoefficients.single_mode(4, 1, 0), g).values
    assert np.allclose(y10, math.sqrt(3 / FOUR_PI) * np.cos(th), atol=1e-14)


def test_synthesize_rejects_complex_zonal():
    c = HarmonicCoefficients.single_mode(3, 2, 0, 1j)
    with pytest.raises(ValueError):
        synthesize(c, SphereGrid.gauss_legendre(3))


def test_synthesize_matches_pointwise_sum():
    rng = np.random.default_rng(0)
    L = 6
    c = HarmonicCoefficients.zeros(L)
    for l in range(L + 1):
        c[l, 0] = rng.standard_normal()
        for m in range(1, l + 1):
            c[l, m] = rng.standard_normal() + 1j * rng.standard_normal()
    g = SphereGrid.gauss_legendre(L, nphi=17)
    th, ph = g.mesh()
    direct = sum(c[l, m] * sph_harm(l, m, th, ph) for l in range(L + 1) for m in range(-l, l + 1))
    assert np.max(np.abs(direct.imag)) < 1e-12
    assert np.allclose(synthesize(c, g).values, direct.real, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    L = 20
    a = (rng.standard_normal((L + 1, L + 1)) + 1j * rng.standard_normal((L + 1, L + 1))) * np.tri(L + 1)
    a[:, 0] = a[:, 0].real
    c = HarmonicCoefficients(a)
    back = analyze(synthesize(c, SphereGrid.gauss_legendre(L)))
    assert np.max(np.abs(back.values - c.values)) < 1e-10


def test_round_trip_l64():
    rng = np.random.default_rng(64)
    L = 64
    a = (rng.standard_normal((L + 1, L + 1)) + 1j * rng.standard_normal((L + 1, L + 1))) * np.tri(L + 1)
    a[:, 0] = a[:, 0].real
    c = HarmonicCoefficients(a)
    back = analyze(synthesize(c, SphereGrid.gauss_legendre(L)))
    assert np.max(np.abs(back.values - c.values)) < 1e-10


def test_eigenrelation():
    g = SphereGrid.gauss_legendre(6)
    for l, m in [(1, 0), (3, 2), (6, 5)]:
        c = HarmonicCoefficients.single_mode(6, l, m)
        lap = synthesize(spectral_laplacian(c), g).values
        assert np.allclose(lap, -eigenvalue(l) * synthesize(c, g).values, atol=1e-12)


def test_coefficient_negative_orders():
    c = HarmonicCoefficients.zeros(3)
    c[2, -1] = 1 + 2j
    assert c[2, 1] == pytest.approx(-(1 - 2j))
    assert c[2, np.int64(-1)] == pytest.approx(1 + 2j)
    with pytest.raises(IndexError):
        c[1, 2]
    with pytest.raises(ValueError):
        HarmonicCoefficients(np.ones((3, 3)))
