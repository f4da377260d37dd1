import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from sphmean import jets
from sphmean.errors import CapabilityError, ConstraintError, DomainError, NotInDPowerImage
from sphmean.jets import Jet
from sphmean.radial import (
    MOMENT_NODES,
    SmoothFn1D,
    RadialProfile,
    bump,
    cheb_fit,
    compose,
    d_antiderivative,
    d_apply,
    d_from_ordinary,
    ibp_residual,
    jet_eval,
    moment,
    monomial,
    polynomial,
)

mpmath.mp.dps = 40

EXP_T2 = SmoothFn1D.from_expression(lambda x: jets.exp(x * x))


def bump_mp(center, hw, amp):
    def f(t):
        x = (t - center) / hw
        return amp * mpmath.exp(-1 / (1 - x * x)) if abs(x) < 1 else mpmath.mpf(0)
    return f


def quad_oracle(p):
    """Adaptive Gauss-Kronrod over the support, tight tolerances."""
    a, b = p.support
    return quad(p, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]


# jet_eval -----------------------------------------------------------------------


def test_jet_eval_polynomial():
    np.testing.assert_allclose(jet_eval(monomial(4), 1.0, 2).coefficients, [1.0, 4.0, 12.0])


def test_jet_eval_even_function_at_zero():
    np.testing.assert_allclose(jet_eval(EXP_T2, 0.0, 1).coefficients, [1.0, 0.0])


def test_jet_eval_outside_support_is_zero():
    np.testing.assert_array_equal(jet_eval(bump(1.0, 0.3), 1.31, 3).coefficients, np.zeros(4))


def test_jet_eval_capability_error():
    with pytest.raises(CapabilityError):
        jet_eval(monomial(4, max_order=3), 1.0, 4)


# d_apply / d_from_ordinary ---------------------------------------------------------


def test_d_apply_polynomial():
    t = np.linspace(0.2, 1.8, 9)
    np.testing.assert_allclose(d_apply(monomial(4), 2)(t), 8.0, rtol=1e-13)


def test_d_apply_exponential():
    t = np.linspace(0.2, 1.8, 9)
    np.testing.assert_allclose(d_apply(EXP_T2, 1)(t), 2 * np.exp(t * t), rtol=1e-13)


def test_d_apply_nested_matches_direct():
    b = bump(1.0, 0.3)
    nested = d_apply(d_apply(d_apply(b, 1), 1), 1)
    assert abs(d_apply(b, 3)(0.9) - nested(0.9)) <= 1e-12 * abs(nested(0.9))


def test_d_apply_identity_and_domain():
    b = bump(1.0, 0.3)
    assert d_apply(b, 0) is b
    with pytest.raises(DomainError):
        d_apply(monomial(4), 1)(0.0)


def test_d_apply_mpmath_oracle():
    # D^2 of the bump by differentiating (1/t) d/dt twice in high precision
    f = bump_mp(1.0, 0.4, 1.0)
    t = 0.85
    d1 = lambda s: mpmath.diff(f, s) / s
    want = float(mpmath.diff(d1, t) / t)
    assert d_apply(bump(1.0, 0.4), 2)(t) == pytest.approx(want, rel=1e-10)


def test_d_from_ordinary():
    assert d_from_ordinary(jet_eval(monomial(4), 1.0, 2), 2) == pytest.approx(8.0, abs=1e-14)
    j = jet_eval(bump(1.0, 0.3), 0.9, 3)
    assert d_from_ordinary(j, 0) == j.value
    got = d_from_ordinary(jet_eval(EXP_T2, 0.7, 2), 2)
    assert got == pytest.approx(d_apply(EXP_T2, 2)(0.7), rel=1e-13)
    with pytest.raises(DomainError):
        d_from_ordinary(jet_eval(EXP_T2, 0.0, 2), 1)


# bump ----------------------------------------------------------------------------------


def test_bump_values():
    b = bump(1.0, 0.5, 1.0)
    assert b(1.0) == pytest.approx(np.exp(-1.0), rel=1e-15)
    np.testing.assert_array_equal(jet_eval(b, 1.5, 6).coefficients, np.zeros(7))


def test_bump_jet_against_mpmath():
    got = jet_eval(bump(0.8, 0.2, 2.0), 0.9, 4).coefficients
    f = bump_mp(0.8, 0.2, 2.0)
    want = [float(mpmath.diff(f, 0.9, i)) for i in range(5)]
    np.testing.assert_allclose(got, want, rtol=1e-11)


@pytest.mark.parametrize("center,hw", [(0.1, 0.2), (1.9, 0.2), (1.0, 0.0), (1.0, -0.1)])
def test_bump_constraint(center, hw):
    with pytest.raises(ConstraintError):
        bump(center, hw)


def test_bump_vanishes_at_support_ends():
    b = bump(1.1, 0.35, 3.0)
    a, c = b.support
    for t in (a, c, a - 0.01, c + 0.01):
        assert np.all(np.abs(jet_eval(b, t, 12).coefficients) < 1e-14 * b.scale())


# profile arithmetic ------------------------------------------------------------------------


def test_profile_arithmetic_supports():
    p = bump(0.8, 0.2) + bump(1.3, 0.3)
    assert isinstance(p, RadialProfile) and p.support == pytest.approx((0.6, 1.6))
    q = monomial(3) * bump(1.0, 0.4)
    assert isinstance(q, RadialProfile) and q.support == pytest.approx((0.6, 1.4))
    assert (q / monomial(1))(1.0) == pytest.approx(np.exp(-1.0))


def test_compose_and_polynomial():
    f = compose(EXP_T2, polynomial([1.0, 2.0]))
    assert f(0.3) == pytest.approx(np.exp(1.6**2), rel=1e-14)
    assert d_apply(f, 1)(0.3) == pytest.approx(2 * 1.6 * np.exp(1.6**2) * 2 / 0.3, rel=1e-13)


def test_cheb_fit_accuracy():
    b = bump(1.0, 0.4)
    s = cheb_fit(b, 0.6, 1.4)
    t = np.linspace(0.6, 1.4, 1001)
    assert np.max(np.abs(s(t) - b(t))) < 1e-13
    integral = s.integ(lbnd=0.6)
    assert integral(1.4) == pytest.approx(quad_oracle(b), rel=1e-12)


# moments ---------------------------------------------------------------------------------


def test_moment_of_d_image_vanishes():
    assert abs(moment(d_apply(bump(1.0, 0.3), 1), 0)) < 1e-12


def test_moment_positive_bump_matches_quad():
    b = bump(1.0, 0.3)
    want = quad(lambda s: s * b(s), 0.7, 1.3, epsabs=1e-16, epsrel=1e-13)[0]
    assert want > 0
    assert moment(b, 0) == pytest.approx(want, rel=1e-12)


def test_moment_shifted_bump_matches_quad():
    b = bump(0.4, 0.25, -1.5)
    for j in range(4):
        want = quad(lambda s: s ** (2 * j + 1) * b(s), 0.15, 0.65, epsabs=1e-16, epsrel=1e-13)[0]
        assert abs(moment(b, j) - want) < 1e-12


def test_moment_equivalence():
    # D^(n+1) of a bump has vanishing moments j = 0..n (here n = 4)
    p = d_apply(bump(1.0, 0.4), 5)
    for j in range(5):
        assert abs(moment(p, j)) < 1e-11 * max(1.0, p.scale())
    d_antiderivative(p, 5)
    with pytest.raises(NotInDPowerImage):
        d_antiderivative(p, 6)


# d_antiderivative ------------------------------------------------------------------------


def test_d_antiderivative_round_trip_order_one():
    v0 = bump(1.0, 0.25)
    v = d_antiderivative(d_apply(v0, 1), 1)
    t = np.linspace(0.7, 1.3, 301)
    assert np.max(np.abs(v(t) - v0(t))) < 1e-10


def test_d_antiderivative_rejects_nonzero_moment():
    with pytest.raises(NotInDPowerImage) as exc:
        d_antiderivative(bump(1.0, 0.3), 1)
    assert exc.value.j == 0


def test_d_antiderivative_order_three():
    v0 = bump(1.1, 0.4, 0.7)
    p = d_apply(v0, 3)
    v = d_antiderivative(p, 3)
    t = np.linspace(0.75, 1.45, 201)
    err = np.max(np.abs(d_apply(v, 3)(t) - p(t)))
    assert err < 1e-9 * p.scale()
    assert np.max(np.abs(v(t) - v0(t))) < 1e-10
    assert v.support == p.support


def test_d_antiderivative_order_zero_is_identity():
    b = bump(1.0, 0.3)
    assert d_antiderivative(b, 0) is b


def test_d_kernel_triviality():
    # D p = 0 on a grid forces p = 0 for compactly supported p: a nonzero bump
    # has nonzero D somewhere, the zero profile has D p = 0 everywhere
    t = np.linspace(0.6, 1.4, 401)
    assert np.max(np.abs(d_apply(bump(1.0, 0.4), 1)(t))) > 0.1
    zero = bump(1.0, 0.4, 0.0)
    assert np.all(d_apply(zero, 1)(t) == 0.0) and np.all(zero(t) == 0.0)


# integration by parts -------------------------------------------------------------------


def test_ibp_polynomials():
    assert ibp_residual(monomial(4), monomial(2), 0.5, 1.5, 1) < 1e-12


def test_ibp_k_zero():
    assert ibp_residual(bump(1.0, 0.4), EXP_T2, 0.3, 1.7, 0) < 1e-13


def test_ibp_bump_exponential():
    assert ibp_residual(bump(1.0, 0.4), EXP_T2, 0.5, 1.5, 2) < 1e-10


@settings(max_examples=20, deadline=None)
@given(c=st.floats(0.6, 1.4), w=st.floats(0.15, 0.45), p=st.integers(0, 5),
       k=st.integers(0, 3), a=st.floats(0.2, 0.8), b=st.floats(1.2, 1.8))
def test_ibp_random(c, w, p, k, a, b):
    F = bump(c, w)
    G = monomial(p) + EXP_T2
    t = np.linspace(a, b, 501)
    scale = max(F.scale(order=k), 1.0) * max(np.max(np.abs(d_apply(G, k)(t))), 1.0)
    assert ibp_residual(F, G, a, b, k, nodes=MOMENT_NODES) < 1e-10 * scale


# properties -------------------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-5, 5), beta=st.floats(-5, 5), j=st.integers(0, 4),
       t=st.floats(0.55, 1.6))
def test_d_apply_linearity(alpha, beta, j, t):
    f, g = bump(1.0, 0.45), bump(1.2, 0.4)
    lhs = d_apply(f * alpha + g * beta, j)(t)
    rhs = alpha * d_apply(f, j)(t) + beta * d_apply(g, j)(t)
    scale = max(1.0, abs(alpha) + abs(beta)) * max(d_apply(f, j).scale(), d_apply(g, j).scale())
    assert abs(lhs - rhs) <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.6, 1.4), j=st.integers(0, 10))
def test_prefix_consistency(t, j):
    b = bump(1.0, 0.4)
    full = jet_eval(b, t, j + 2).coefficients[: j + 1]
    np.testing.assert_allclose(jet_eval(b, t, j).coefficients, full, rtol=1e-14, atol=0)
