from math import gamma, pi

import numpy as np
import pytest
from scipy.integrate import dblquad, quad
from scipy.special import eval_legendre

from sphmean.errors import CalibrationError, ConstraintError, DomainError
from sphmean.radial import SmoothFn1D, bump, d_apply, monomial
from sphmean.special import Dimension, spherical_harmonic_eval
from sphmean.transform import (
    Bump3D,
    QuadratureSpec,
    RadialBump,
    RadialPhantom,
    SampledRadialPhantom,
    Sum3DPhantom,
    backproject,
    backproject_radial_reduced,
    calibrate_inversion,
    closed_form_P_Dn2,
    forward_radial,
    forward_sphere3,
    fpr_invert_radial,
    riesz_radial,
    sinogram_radial,
    sphere_grid,
    zonal_harmonic_profile,
)

D3, D5, D7 = Dimension(3), Dimension(5), Dimension(7)
PH = RadialPhantom([RadialBump(0.0, 0.6, 1.0), RadialBump(0.5, 0.2, -0.7)])
ONE = SmoothFn1D.from_expression(lambda x: x * 0.0 + 1.0)


def total_mass(f, dim):
    lo, hi = f.inner_radius, f.support_radius
    return dim.omega_n * quad(lambda s: s ** (dim.n - 1) * f.radial_values(s), lo, hi,
                              epsabs=1e-15, epsrel=1e-13, limit=200)[0]


# phantoms -----------------------------------------------------------------------------


@pytest.mark.parametrize("bumps", [[], [(0.1, 0.3)], [(0.8, 0.2)], [(0.0, -0.1)]])
def test_radial_phantom_constraints(bumps):
    with pytest.raises(ConstraintError):
        RadialPhantom(bumps)


def test_sum3d_constraints():
    with pytest.raises(ConstraintError):
        Sum3DPhantom([Bump3D((0.7, 0.0, 0.0), 0.3)])
    with pytest.raises(ConstraintError):
        Sum3DPhantom([Bump3D((0.1, 0.0), 0.3)])


def test_radial_phantom_even_and_smooth():
    f = RadialPhantom([RadialBump(0.3, 0.3, 1.0)])
    s = np.linspace(-0.9, 0.9, 41)
    np.testing.assert_array_equal(f.radial_values(s), f.radial_values(-s))
    x = np.array([[0.1, 0.2, 0.3]])
    assert f(x)[0] == pytest.approx(f.radial_values(np.linalg.norm(x)))


def test_sampled_phantom_interpolates():
    r = np.linspace(0.05, 0.95, 200)
    sp = SampledRadialPhantom(r, PH.radial_values(r))
    s = np.linspace(0.1, 0.9, 37)
    np.testing.assert_allclose(sp.radial_values(s), PH.radial_values(s), atol=1e-5)


# forward transform -------------------------------------------------------------------------


def test_forward_vanishes_outside_shell():
    f = RadialPhantom([RadialBump(0.0, 0.3, 1.0)])
    assert forward_radial(f, 0.5, D3) == 0.0
    assert forward_radial(f, 1.75, D3) == 0.0


@pytest.mark.parametrize("dim", [D3, D5, D7])
def test_forward_normalization(dim):
    g = sinogram_radial(PH, dim)
    a, b = g.support
    lhs = dim.omega_n * quad(lambda t: t ** (dim.n - 1) * g(t), a, b,
                             epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    assert lhs == pytest.approx(total_mass(PH, dim), rel=1e-9)


def test_forward_matches_sphere_quadrature():
    p = np.array([0.0, 0.6, 0.8])
    for t in (0.7, 1.0, 1.3):
        direct = forward_sphere3(PH, p, t)
        assert forward_radial(PH, t, D3) == pytest.approx(direct, rel=1e-8)


def test_forward_domain():
    with pytest.raises(DomainError):
        forward_radial(PH, 2.0, D3)


def test_forward_sphere3_centered_matches_radial(rng):
    f3 = Sum3DPhantom([Bump3D((0.0, 0.0, 0.0), 0.7, 1.3)])
    fr = RadialPhantom([RadialBump(0.0, 0.7, 1.3)])
    scale = sinogram_radial(fr, D3).scale()
    for _ in range(5):
        p = rng.normal(size=3)
        p /= np.linalg.norm(p)
        t = rng.uniform(0.35, 1.65)
        assert abs(forward_sphere3(f3, p, t) - forward_radial(fr, t, D3)) < 1e-9 * scale


def test_forward_sphere3_zero():
    f = Sum3DPhantom([Bump3D((0.1, 0.2, 0.0), 0.4, 0.0)])
    assert forward_sphere3(f, np.array([1.0, 0, 0]), 1.0) == 0.0


def test_forward_sphere3_adaptive_oracle():
    f = Sum3DPhantom([Bump3D((0.3, 0.0, 0.1), 0.35, 1.0), Bump3D((-0.2, 0.3, -0.2), 0.3, -0.8)])
    p = np.array([0.48, -0.6, 0.64])
    for t in (0.9, 1.2):
        def integrand(phi, polar):
            d = np.array([np.sin(polar) * np.cos(phi), np.sin(polar) * np.sin(phi), np.cos(polar)])
            return f((p + t * d)[None])[0] * np.sin(polar)

        want = dblquad(integrand, 0, pi, 0, 2 * pi, epsabs=1e-13, epsrel=1e-11)[0] / (4 * pi)
        assert forward_sphere3(f, p, t) == pytest.approx(want, rel=1e-7)


def test_linearity_of_M_and_P(rng):
    a, b = rng.normal(size=2)
    f1 = RadialPhantom([RadialBump(0.0, 0.6, 1.0)])
    f2 = RadialPhantom([RadialBump(0.5, 0.2, 1.0)])
    comb = RadialPhantom([RadialBump(0.0, 0.6, a), RadialBump(0.5, 0.2, b)])
    t = np.linspace(0.1, 1.9, 51)
    g1, g2, gc = (sinogram_radial(f, D5) for f in (f1, f2, comb))
    np.testing.assert_allclose(gc(t), a * g1(t) + b * g2(t), atol=1e-10)
    r = np.linspace(0.1, 0.9, 17)
    lhs = backproject_radial_reduced(gc, r, D5)
    rhs = a * backproject_radial_reduced(g1, r, D5) + b * backproject_radial_reduced(g2, r, D5)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.9])
def test_support_propagation(rho):
    f = RadialPhantom([RadialBump(0.0, rho, 1.0)])
    g = sinogram_radial(f, D5)
    assert g.support[0] >= 1 - rho - 1e-12 and g.support[1] <= 1 + rho + 1e-12
    t = np.concatenate([np.linspace(0.01, 1 - rho, 20), np.linspace(1 + rho, 1.99, 20)])
    assert np.all(g(t) == 0.0)


# backprojection ---------------------------------------------------------------------------------


@pytest.mark.parametrize("dim", [D3, D5, D7])
def test_backproject_constant(dim):
    x = np.zeros(dim.n)
    x[0] = 0.4
    assert backproject(ONE, x, dim) == pytest.approx(1.0, rel=1e-13)


def test_backproject_constant_direct_n3():
    x = np.array([0.1, 0.3, -0.2])
    assert backproject(lambda th, t: np.ones_like(t), x, D3) == pytest.approx(1.0, rel=1e-13)


def test_backproject_zonal_matches_reduced():
    g = sinogram_radial(PH, D3)
    for x in (np.array([0.3, 0.0, 0.4]), np.array([-0.2, 0.7, 0.1])):
        r = np.linalg.norm(x)
        direct = backproject(lambda th, t: g(t), x, D3)
        assert direct == pytest.approx(backproject_radial_reduced(g, r, D3), abs=1e-9)
        assert backproject(g, x, D3) == pytest.approx(backproject_radial_reduced(g, r, D3),
                                                      abs=1e-12)


def test_backproject_harmonic_reduction():
    w = bump(1.0, 0.5)
    m, l = 2, 4
    for x in (np.array([0.2, -0.3, 0.35]), np.array([0.0, 0.5, 0.2])):
        r = np.linalg.norm(x)
        xhat = x / r
        got = backproject(lambda th, t: spherical_harmonic_eval(m, l, th) * w(t), x, D3)
        # Funk-Hecke in s = <xhat, theta>, |x - theta| = sqrt(1 + r^2 - 2 r s)
        radial = 2 * pi * quad(lambda s: w(np.sqrt(1 + r * r - 2 * r * s)) * eval_legendre(m, s),
                               -1, 1, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
        want = spherical_harmonic_eval(m, l, xhat) * radial / (4 * pi)
        assert got == pytest.approx(want, rel=1e-8, abs=1e-12)


def test_backproject_domain():
    with pytest.raises(DomainError):
        backproject(ONE, np.array([0.0, 0.0, 0.99]), D3)
    with pytest.raises(DomainError):
        backproject_radial_reduced(ONE, 0.0, D3)
    with pytest.raises(ConstraintError):
        backproject(ONE, np.array([0.1, 0.0]), D3)


def test_reduced_disjoint_support():
    assert backproject_radial_reduced(bump(1.7, 0.2), 0.3, D3) == 0.0


def test_reduced_n3_hand_quadrature():
    g = bump(1.1, 0.4)
    for r in (0.2, 0.5, 0.8):
        want = quad(lambda u: u * g(u), 1 - r, 1 + r, epsabs=1e-15, epsrel=1e-13,
                    limit=200)[0] / (2 * r)
        assert backproject_radial_reduced(g, r, D3) == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_reduced_n5_matches_zonal_definition():
    g = bump(1.0, 0.4)
    x = np.array([0.5, 0, 0, 0, 0])
    want = backproject(g, x, D5, QuadratureSpec(radial_nodes=6400))
    assert backproject_radial_reduced(g, 0.5, D5) == pytest.approx(want, rel=1e-9)


# closed form ---------------------------------------------------------------------------------------


def test_closed_form_n3_symmetric_vanishes():
    h = bump(1.0, 0.3)
    r = np.linspace(0.1, 0.9, 9)
    assert np.max(np.abs(closed_form_P_Dn2(h, r, D3))) < 1e-15
    asym = bump(1.2, 0.3)
    np.testing.assert_allclose(closed_form_P_Dn2(asym, r, D3),
                               0.5 * (asym(1 + r) - asym(1 - r)) / r, rtol=1e-14)


def test_closed_form_n5_example():
    h = monomial(3) * bump(1.0, 0.5)
    want = backproject_radial_reduced(d_apply(h, 3), 0.4, D5)
    assert closed_form_P_Dn2(h, 0.4, D5) == pytest.approx(want, rel=1e-8)


def test_closed_form_zero():
    zero = bump(1.0, 0.5, 0.0)
    for dim in (D3, D5, D7):
        assert closed_form_P_Dn2(zero, 0.3, dim) == 0.0


@pytest.mark.parametrize("dim", [D3, D5, D7])
def test_closed_form_vs_quadrature(dim, rng):
    quad_fine = QuadratureSpec(radial_nodes=6400)
    for _ in range(2):
        h = bump(rng.uniform(0.8, 1.2), rng.uniform(0.3, 0.6), rng.uniform(0.5, 1.5))
        r = np.sort(rng.uniform(0.1, 0.9, 5))
        cf = closed_form_P_Dn2(h, r, dim)
        qd = backproject_radial_reduced(d_apply(h, dim.n - 2), r, dim, quad_fine)
        assert np.max(np.abs(cf - qd)) <= 1e-8 * np.max(np.abs(qd))


# inversion -------------------------------------------------------------------------------------------


@pytest.mark.parametrize("dim", [D3, D5])
def test_inversion_round_trip(dim):
    r = np.linspace(0.05, 0.95, 61)
    fh = fpr_invert_radial(sinogram_radial(PH, dim), r, dim)
    ft = PH.radial_values(r)
    assert np.linalg.norm(fh - ft) / np.linalg.norm(ft) < 1e-3


def test_inversion_of_zero():
    g = sinogram_radial(RadialPhantom([RadialBump(0.0, 0.5, 0.0)]), D3)
    assert fpr_invert_radial(g, 0.5, D3) == 0.0


def test_inversion_domain():
    g = sinogram_radial(PH, D3)
    with pytest.raises(DomainError):
        fpr_invert_radial(g, 0.97, D3)


@pytest.mark.parametrize("dim", [D3, D5])
def test_calibration_consistency(dim):
    a = calibrate_inversion(dim)
    b = calibrate_inversion(dim, phantom=RadialPhantom([RadialBump(0.45, 0.3, 2.0)]))
    assert b.c_hat == pytest.approx(a.c_hat, rel=1e-4)
    assert a.residual < 1e-3 and a.c_hat != 0.0


def test_calibration_scaled_phantom():
    f = RadialPhantom([RadialBump(0.0, 0.8, 1.0)])
    a = calibrate_inversion(D3, phantom=f)
    b = calibrate_inversion(D3, phantom=f.scaled(-3.5))
    assert b.c_hat == pytest.approx(a.c_hat, rel=1e-12)


def test_calibration_failure():
    with pytest.raises(CalibrationError):
        calibrate_inversion(D3, max_residual=1e-15)


# Riesz potential -------------------------------------------------------------------------------------


@pytest.mark.parametrize("dim", [D3, D5])
def test_riesz_outside_support_is_point_mass(dim):
    f = RadialPhantom([RadialBump(0.2, 0.05, 1.0)])
    const = gamma((dim.n - 2) / 2) / (4 * pi ** (dim.n / 2))
    r = np.array([0.3, 0.6, 0.9])
    np.testing.assert_allclose(riesz_radial(f, r, dim),
                               const * total_mass(f, dim) * r ** (2.0 - dim.n), rtol=1e-10)


def test_riesz_zero():
    f = RadialPhantom([RadialBump(0.0, 0.5, 0.0)])
    assert riesz_radial(f, 0.4, D3) == 0.0


def test_riesz_direct_3d_oracle():
    f = RadialPhantom([RadialBump(0.0, 0.7, 1.0)])
    r = 0.5

    # (1/4pi) int f(y)/|x-y| dy; the angular integral is done numerically, not by
    # the shell theorem: int_S2 dw / |x - s w| = 2 pi int_{-1}^{1} dmu / sqrt(r^2 + s^2 - 2 r s mu),
    # with mu = 1 - v^2 removing the inverse square root at s = r
    def angular(s):
        integrand = lambda v: 2 * v / np.sqrt((r - s) ** 2 + 2 * r * s * v * v)
        return 2 * pi * quad(integrand, 0, np.sqrt(2), epsabs=1e-15, epsrel=1e-13, limit=200)[0]

    want = sum(quad(lambda s: s * s * f.radial_values(s) * angular(s), a, b,
                    epsabs=1e-15, epsrel=1e-12, limit=200)[0] for a, b in [(0, r), (r, 0.7)])
    want /= 4 * pi
    assert riesz_radial(f, r, D3) == pytest.approx(want, rel=1e-7)


def test_riesz_domain():
    with pytest.raises(DomainError):
        riesz_radial(PH, 1.0, D3)


# harmonic coefficients ----------------------------------------------------------------------------------


def test_zonal_harmonic_profile_matches_projection():
    f = Sum3DPhantom([Bump3D((0.3, -0.2, 0.25), 0.3, 1.0)])
    coarse = QuadratureSpec(polar_nodes=96, azimuth_nodes=192)
    pts, w = sphere_grid(24, 48)
    t = np.array([0.8, 1.05])
    data = np.array([forward_sphere3(f, th, t, coarse) for th in pts])
    for m, l in [(0, 1), (1, 2), (2, 5)]:
        y = spherical_harmonic_eval(m, l, pts)
        direct = (w * y) @ data
        coef = sum(c * p(t) for c, p in zonal_harmonic_profile(f, m, l))
        np.testing.assert_allclose(coef, direct, rtol=1e-5, atol=1e-7)
