import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wienerhopf.errors import MomentDiverges, NonIntegrableKernel
from wienerhopf.kernel import (
    ConditionId,
    ExpPolyHalf,
    KernelSpec,
    Level,
    SampledHalf,
    Subject,
    Term,
    K1_from_K,
    build_K1_from_K0,
    build_K_from_K1,
    gamma_family,
    moment,
    moments_of,
    tilde_of,
    two_sided_exp,
    verify_conditions,
)

terms = st.builds(
    Term,
    st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3),
    st.integers(0, 3),
    st.floats(0.3, 4.0),
)
halves = st.lists(terms, min_size=0, max_size=3)


def quad_half(f, m=0):
    val, _ = quad(lambda s: f(s) * s**m, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def verdicts(spec, **kw):
    return {v.condition: v for v in verify_conditions(spec, **kw)}


# -- terms and closed-form halves -------------------------------------------


def test_term_rejects_nonpositive_decay():
    with pytest.raises(NonIntegrableKernel):
        Term(1.0, 0, 0.0)
    with pytest.raises(NonIntegrableKernel):
        Term(1.0, 0, -1.0)


def test_term_rejects_fractional_power():
    with pytest.raises(ValueError):
        Term(1.0, 1.5, 1.0)


def test_like_terms_merge_and_cancel():
    h = ExpPolyHalf([Term(1.0, 0, 1.0), Term(2.0, 0, 1.0), Term(-3.0, 0, 1.0), Term(1.0, 1, 2.0)])
    assert h.terms == (Term(1.0, 1, 2.0),)


@settings(max_examples=40, deadline=None)
@given(halves, st.integers(0, 2))
def test_closed_form_moments_match_quadrature(ts, m):
    h = ExpPolyHalf(ts)
    assert h.moment(m).value == pytest.approx(quad_half(h, m), abs=1e-10 * (1 + h.scale * 10))


@settings(max_examples=40, deadline=None)
@given(halves, st.floats(0.0, 30.0))
def test_tail_integral_matches_quadrature(ts, s0):
    h = ExpPolyHalf(ts)
    expected, _ = quad(h, s0, np.inf, epsabs=1e-13, limit=200)
    assert h.tail_integral()(s0) == pytest.approx(expected, abs=1e-10 * (1 + h.scale))


@settings(max_examples=40, deadline=None)
@given(halves)
def test_derivative_undoes_tail_integral(ts):
    h = ExpPolyHalf(ts)
    back = h.tail_integral().derivative().scaled(-1)
    s = np.linspace(0, 10, 7)
    np.testing.assert_allclose(back(s), h(s), atol=1e-12 * (1 + h.scale))


@settings(max_examples=30, deadline=None)
@given(halves, st.lists(st.floats(0.01, 50.0), min_size=1, max_size=4))
def test_closed_transforms_match_quadpack(ts, lams):
    h = ExpPolyHalf(ts)
    lam = np.array(lams)
    C, S, _ = h.transforms(lam, method="closed")
    Cq, Sq, _ = h.transforms(lam, method="quad", tol=1e-6)
    np.testing.assert_allclose(C, Cq, atol=1e-9 * (1 + h.scale))
    np.testing.assert_allclose(S, Sq, atol=1e-9 * (1 + h.scale))


def test_complex_coefficients_transform_componentwise():
    h = ExpPolyHalf([Term(1 + 2j, 1, 1.5)])
    lam = np.array([0.2, 3.0])
    C, S, _ = h.transforms(lam, method="closed")
    Cr, Sr, _ = ExpPolyHalf([Term(1.0, 1, 1.5)]).transforms(lam, method="closed")
    np.testing.assert_allclose(C, (1 + 2j) * Cr, rtol=1e-14)
    np.testing.assert_allclose(S, (1 + 2j) * Sr, rtol=1e-14)


# -- level changes -----------------------------------------------------------


def test_two_sided_exponential_is_a_fixed_point_of_tail_integration():
    k0 = two_sided_exp()
    k1 = build_K1_from_K0(k0)
    K = build_K_from_K1(k1)
    t = np.array([-3.0, -0.5, 0.25, 2.0])
    np.testing.assert_allclose(k1(t), 0.5 * np.exp(-np.abs(t)), rtol=1e-15)
    np.testing.assert_allclose(K(t), 0.5 * np.exp(-np.abs(t)), rtol=1e-15)
    assert k1.level is Level.K1 and K.level is Level.K


@settings(max_examples=30, deadline=None)
@given(halves, halves)
def test_K1_from_K_inverts_build(pos, neg):
    k1 = KernelSpec(Level.K1, pos, neg)
    back = K1_from_K(build_K_from_K1(k1))
    t = np.array([-4.0, -1.0, -0.1, 0.1, 1.0, 4.0])
    np.testing.assert_allclose(back(t), k1(t), atol=1e-12 * (1 + k1.pos.scale + k1.neg.scale))


@settings(max_examples=30, deadline=None)
@given(halves, halves)
def test_tilde_is_an_involution(pos, neg):
    k1 = KernelSpec(Level.K1, pos, neg)
    twice = tilde_of(tilde_of(k1))
    t = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(twice(t), k1(t), atol=1e-15)


def test_level_mismatch_is_rejected():
    with pytest.raises(ValueError):
        build_K1_from_K0(gamma_family(0.0))
    with pytest.raises(ValueError):
        tilde_of(two_sided_exp())


def test_value_at_zero_is_mean_of_one_sided_limits():
    k = gamma_family(-3.0)
    assert k(0.0) == pytest.approx(-1.0)


# -- moments -----------------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.0, -1.0, -3.0, 0.5])
def test_gamma_family_moments(gamma):
    # tilde K1 = e^{-t} (t > 0), -gamma e^{t} (t < 0)
    ms = moments_of(gamma_family(gamma), Subject.TILDE_K1)
    assert ms.nu0 == pytest.approx(1 - gamma, abs=1e-15)
    assert ms.nu1 == pytest.approx(1 + gamma, abs=1e-15)
    assert ms.nu2 == pytest.approx(2 - 2 * gamma, abs=1e-15)


def test_moment_against_quadrature_of_full_line():
    k = KernelSpec(Level.K1, [Term(1.0, 2, 1.3), Term(-0.4, 0, 0.7)], [Term(0.8, 1, 2.1)])
    for m in range(3):
        expected, _ = quad(lambda t: t**m * k(t), -np.inf, np.inf, epsabs=1e-13, limit=200, points=None)
        assert moment(k, m).value == pytest.approx(expected, abs=1e-9)


def test_moments_scale_linearly():
    ms = moments_of(gamma_family(-3.0), Subject.TILDE_K1)
    ms2 = moments_of(gamma_family(-3.0).scaled(2.0), Subject.TILDE_K1)
    for a, b in zip((ms.nu0, ms.nu1, ms.nu2), (ms2.nu0, ms2.nu1, ms2.nu2)):
        assert b == pytest.approx(2 * a)
    assert ms.scaled(2.0).nu2 == pytest.approx(ms2.nu2)


# -- tabulated halves ----------------------------------------------------------


def sampled_exp(n=400, end=60.0, rate=1.0, start=1e-3):
    s = np.geomspace(start, end, n)
    return SampledHalf(s, np.exp(-rate * s))


def test_sampled_tail_rate_is_recovered():
    h = sampled_exp(rate=1.7, end=15.0)
    assert h.tail_rate == pytest.approx(1.7, rel=1e-8)


def test_negligible_tail_counts_as_zero():
    h = sampled_exp(rate=1.7, end=60.0)
    assert h.tail_amp == 0


def test_sampled_moments_approximate_exponential():
    h = sampled_exp()
    for m in range(3):
        mo = h.moment(m)
        assert mo.value == pytest.approx(math.factorial(m), rel=1e-6)
        # the refinement estimate is conservative
        assert abs(mo.value - math.factorial(m)) <= mo.error + 1e-12


def test_sampled_filon_agrees_with_quadpack():
    h = SampledHalf(np.linspace(0, 30, 200), np.exp(-np.linspace(0, 30, 200)) * (1 + np.linspace(0, 30, 200)))
    lam = np.array([1e-3, 0.4, 3.0, 25.0])
    C, S, _ = h.transforms(lam, method="quad")
    Cq, Sq, _ = h.transforms(lam, method="quadpack", tol=1e-6)
    np.testing.assert_allclose(C, Cq, atol=1e-8)
    np.testing.assert_allclose(S, Sq, atol=1e-8)


def test_sampled_filon_small_frequency_keeps_relative_accuracy():
    # (1 - cos) ~ lam^2 nu2 / 2 must not drown in cancellation
    h = sampled_exp()
    lam = np.array([1e-4])
    C, _, _ = h.transforms(lam)
    assert C[0] == pytest.approx(lam[0] ** 2 * 2 / 2, rel=1e-4)


def test_non_decaying_tail_is_rejected():
    s = np.linspace(0, 10, 50)
    h = SampledHalf(s, np.exp(0.1 * s))
    with pytest.raises(NonIntegrableKernel):
        h.tail_integral()
    with pytest.raises(MomentDiverges):
        h.moment(0)


def test_sign_changing_tail_is_rejected():
    s = np.linspace(0, 20, 100)
    h = SampledHalf(s, np.exp(-s) * np.cos(3 * s))
    assert h.tail_rate is None
    with pytest.raises(MomentDiverges):
        h.moment(1)


def test_tabulated_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(Level.K0, tabulated=([-1.0, 1.0, 0.5, 2.0], [1, 2, 3, 4]))
    with pytest.raises(ValueError):
        KernelSpec(Level.K0, tabulated=([0.5, 1.0, 2.0, 3.0], [1, 2, 3, 4]))
    with pytest.raises(ValueError):
        KernelSpec(Level.K1, [Term(1, 0, 1)], tabulated=([-1.0, 1.0], [1, 1]))


def test_tabulated_spec_matches_closed_form_moments():
    t = np.concatenate([-np.geomspace(60, 1e-3, 300), np.geomspace(1e-3, 60, 300)])
    v = np.where(t > 0, np.exp(-np.abs(t)), -3 * np.exp(-np.abs(t)))
    ms = moments_of(KernelSpec(Level.K1, tabulated=(t, v)), Subject.TILDE_K1)
    assert ms.nu0 == pytest.approx(4.0, rel=1e-6)
    assert ms.nu1 == pytest.approx(-2.0, rel=1e-6)
    assert ms.nu2 == pytest.approx(8.0, rel=1e-5)


# -- conditions ------------------------------------------------------------------


@pytest.mark.parametrize("gamma, sign, positive", [
    (0.0, True, True), (-3.0, True, True), (-1.0, True, True),
    (1.0, True, False),  # boundary: sign difference vanishes identically
    (2.0, False, False),
])
def test_gamma_family_conditions(gamma, sign, positive):
    v = verdicts(gamma_family(gamma))
    assert v[ConditionId.SIGN].holds is sign
    assert v[ConditionId.POSITIVITY].holds is positive
    assert v[ConditionId.POSITIVITY].value == pytest.approx(1 - gamma)


def test_two_sided_k0_satisfies_alpha_and_beta():
    v = verdicts(two_sided_exp())
    assert v[ConditionId.ALPHA_SIGN].holds
    assert v[ConditionId.BETA_MOMENTS].holds
    nu0, nu1, nu2 = v[ConditionId.BETA_MOMENTS].value
    assert (nu0, nu1, nu2) == pytest.approx((1.0, 0.0, 2.0))


def test_asymmetric_k0_fails_beta():
    k0 = KernelSpec(Level.K0, [Term(0.5, 0, 1.0)], [Term(0.5, 0, 2.0)])
    assert not verdicts(k0)[ConditionId.BETA_MOMENTS].holds


def test_symmetric_k1_fails_positivity_with_equality():
    v = verdicts(two_sided_exp(level=Level.K1))
    assert v[ConditionId.SIGN].holds
    assert not v[ConditionId.POSITIVITY].holds
    assert v[ConditionId.POSITIVITY].value == pytest.approx(0.0, abs=1e-15)


def test_level_K_input_is_checked_through_K1():
    v = verdicts(build_K_from_K1(gamma_family(-3.0)))
    assert v[ConditionId.SIGN].holds and v[ConditionId.POSITIVITY].holds


@settings(max_examples=30, deadline=None)
@given(halves, halves, st.floats(0.01, 100.0))
def test_positive_scaling_preserves_verdicts(pos, neg, c):
    k1 = KernelSpec(Level.K1, pos, neg)
    a = [v.holds for v in verify_conditions(k1)]
    b = [v.holds for v in verify_conditions(k1.scaled(c))]
    assert a == b
