import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wienerhopf.classify import CaseLabel
from wienerhopf.errors import CaseMismatch, UnderResolved, VanishingSymbol
from wienerhopf.kernel import KernelSpec, Level, Subject, Term, gamma_family, moments_of, two_sided_exp
from wienerhopf.symbol import (
    LambdaGrid,
    SymbolSamples,
    cayley_factor,
    check_arg_halfplane,
    check_nonvanishing,
    deficit_at,
    eval_a,
    eval_b,
    eval_c1,
    eval_d,
    eval_regular_factor,
    fourier_transform,
    regular_factor_C,
    rho_plus_values,
    winding_index,
)

GRID = LambdaGrid(512)


def b_of(k1, grid=GRID, method="auto"):
    ms = moments_of(k1, Subject.TILDE_K1)
    return eval_b(k1, ms, grid, method), ms


def test_grid_layout():
    g = LambdaGrid(16)
    assert g.interior.size == 14
    assert np.all(np.diff(g.interior) > 0)
    assert 0.0 not in g.interior
    # nested refinement: every coarse node reappears
    fine = g.refined().interior
    assert np.all(np.isin(np.round(g.interior, 12), np.round(fine, 12)))


def test_grid_rejects_odd_size():
    with pytest.raises(ValueError):
        LambdaGrid(15)


def test_two_sided_fourier_transform():
    ft = fourier_transform(two_sided_exp(), GRID)
    lam = GRID.interior
    np.testing.assert_allclose(ft.values, 1 / (1 + lam**2), rtol=1e-13, atol=1e-15)
    assert ft.value_at_zero == 1 and ft.value_at_infinity == 0


@pytest.mark.parametrize("gamma", [0.0, -1.0, -3.0, 0.5])
def test_b_closed_route_matches_hand_formula(gamma):
    b, _ = b_of(gamma_family(gamma))
    lam = GRID.interior
    # (1 - gamma) - 1/(1 - i lam) + gamma/(1 + i lam), regrouped to avoid cancellation near 0
    exact = -1j * lam / (1 - 1j * lam) - 1j * gamma * lam / (1 + 1j * lam)
    np.testing.assert_allclose(b.values, exact, rtol=1e-11)
    assert b.value_at_zero == 0 and b.value_at_infinity == pytest.approx(1 - gamma)


def test_d_of_two_sided_k0():
    k0 = two_sided_exp()
    d = eval_d(k0, moments_of(k0, Subject.K0), GRID)
    lam = GRID.interior
    np.testing.assert_allclose(d.values, lam**2 / (1 + lam**2), rtol=1e-12, atol=1e-15)


def test_eval_b_guards_level_and_subject():
    k0 = two_sided_exp()
    with pytest.raises(ValueError):
        eval_b(k0, moments_of(k0, Subject.K0), GRID)
    k1 = gamma_family(0.0)
    with pytest.raises(ValueError):
        eval_b(k1, moments_of(two_sided_exp(), Subject.K0), GRID)


kernels = st.builds(
    lambda pos, neg: KernelSpec(Level.K1, pos, neg),
    st.lists(st.builds(Term, st.floats(-2, 2).filter(lambda c: abs(c) > 1e-2), st.integers(0, 2),
                       st.floats(0.5, 3.0)), min_size=1, max_size=3),
    st.lists(st.builds(Term, st.floats(-2, 2).filter(lambda c: abs(c) > 1e-2), st.integers(0, 2),
                       st.floats(0.5, 3.0)), max_size=2),
)


@settings(max_examples=25, deadline=None)
@given(kernels)
def test_real_kernel_gives_conjugate_symmetric_b(k1):
    b, _ = b_of(k1)
    lam = GRID.interior
    # the grid is symmetric about 0 apart from the shared infinity node
    np.testing.assert_allclose(b.values[lam < 0][::-1], np.conj(b.values[lam > 0]), atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(kernels, kernels, st.floats(-3, 3))
def test_deficit_is_linear_in_the_kernel(k, g, c):
    lam = np.array([-2.0, 0.3, 5.0])
    combo = KernelSpec(Level.K1, k.pos_terms + tuple(Term(t.c * c, t.k, t.a) for t in g.pos_terms),
                       k.neg_terms + tuple(Term(t.c * c, t.k, t.a) for t in g.neg_terms))
    np.testing.assert_allclose(deficit_at(combo, lam), deficit_at(k, lam) + c * deficit_at(g, lam),
                               atol=1e-12 * (1 + abs(c)) * 10)


@settings(max_examples=15, deadline=None)
@given(kernels)
def test_quad_route_agrees_with_closed_route(k1):
    lam = np.array([-7.0, -0.01, 0.5, 40.0])
    np.testing.assert_allclose(deficit_at(k1, lam, "quad", 1e-6), deficit_at(k1, lam, "closed"),
                               atol=1e-9 * (1 + k1.pos.scale + k1.neg.scale))


def test_a_endpoints():
    b, ms = b_of(gamma_family(-3.0))
    a = eval_a(b, ms)
    assert a.value_at_zero == pytest.approx(ms.nu1) and a.value_at_infinity == 0
    lam = GRID.interior
    np.testing.assert_allclose(a.values, 1j * b.values / lam)


# -- regular factors --------------------------------------------------------


@pytest.mark.parametrize("gamma, case", [(0.0, CaseLabel.CASE_I), (-3.0, CaseLabel.CASE_II),
                                         (-1.0, CaseLabel.CASE_III), (-0.5, CaseLabel.CASE_I)])
def test_rho_plus_times_C_reproduces_a(gamma, case):
    b, ms = b_of(gamma_family(gamma))
    C = regular_factor_C(case, eval_regular_factor(case, b, ms))
    a = eval_a(b, ms)
    np.testing.assert_allclose(rho_plus_values(case, GRID.interior) * C.values, a.values, atol=1e-13)


def test_rho_plus_times_C_reproduces_a_for_k0():
    k0 = two_sided_exp()
    m0 = moments_of(k0, Subject.K0)
    from wienerhopf.kernel import build_K1_from_K0
    b, ms = b_of(build_K1_from_K0(k0))
    C = regular_factor_C(CaseLabel.ALPHA_BETA, eval_regular_factor(CaseLabel.ALPHA_BETA, eval_d(k0, m0, GRID), m0))
    np.testing.assert_allclose(rho_plus_values(CaseLabel.ALPHA_BETA, GRID.interior) * C.values,
                               eval_a(b, ms).values, atol=1e-13)


def test_regular_factor_limits_are_continuous():
    # the analytic value at 0 should continue the interior samples
    grid = LambdaGrid(4096)
    for gamma, case in ((0.0, CaseLabel.CASE_I), (-3.0, CaseLabel.CASE_II), (-1.0, CaseLabel.CASE_III)):
        b, ms = b_of(gamma_family(gamma), grid)
        reg = eval_regular_factor(case, b, ms)
        near = reg.values[np.argmin(np.abs(grid.interior))]
        assert near == pytest.approx(reg.value_at_zero, abs=1e-2)
        far = reg.values[0]
        assert far == pytest.approx(reg.value_at_infinity, abs=1e-2)


def test_case_III_factor_is_constant_two():
    b, ms = b_of(gamma_family(-1.0))
    c = eval_regular_factor(CaseLabel.CASE_III, b, ms)
    np.testing.assert_allclose(c.values, 2.0, atol=1e-12)
    assert c.value_at_zero == pytest.approx(2.0) and c.value_at_infinity == pytest.approx(2.0)


def test_regular_factor_rejects_wrong_case():
    b, ms = b_of(gamma_family(0.0))
    with pytest.raises(CaseMismatch):
        eval_regular_factor(CaseLabel.CASE_II, b, ms)


def test_half_plane_verdicts():
    b, ms = b_of(gamma_family(-3.0))
    assert check_arg_halfplane(b).holds
    c = eval_regular_factor(CaseLabel.CASE_II, b, ms)
    v = check_arg_halfplane(c)
    assert v.holds and v.margin == pytest.approx(2.0, rel=1e-3)


# -- winding ----------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(st.integers(-4, 4))
def test_cayley_powers_wind_by_their_exponent(p):
    assert winding_index(cayley_factor(LambdaGrid(256), p)).index == p


@settings(max_examples=20, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_winding_is_additive(p, q):
    g = LambdaGrid(256)
    assert winding_index(cayley_factor(g, p) * cayley_factor(g, q)).index == p + q


@pytest.mark.parametrize("n", [128, 512, 2048, 8192])
def test_winding_is_refinement_invariant(n):
    b, ms = b_of(gamma_family(-3.0), LambdaGrid(n))
    c1 = eval_c1(CaseLabel.CASE_II, eval_regular_factor(CaseLabel.CASE_II, b, ms))
    assert winding_index(c1).index == -1


def test_constant_winds_zero_times():
    g = LambdaGrid(64)
    s = SymbolSamples(g, np.full(g.interior.size, 2.0 + 0j), 2.0, 2.0)
    res = winding_index(s)
    assert res.index == 0 and res.raw_phase_turns == 0


def test_b_itself_vanishes_and_has_no_index():
    b, _ = b_of(gamma_family(0.0))
    assert not check_nonvanishing(b).holds
    with pytest.raises(VanishingSymbol):
        winding_index(b)


def test_coarse_grid_is_under_resolved():
    # 12 turns on 16 nodes cannot be tracked
    with pytest.raises(UnderResolved):
        winding_index(cayley_factor(LambdaGrid(16), 12))


def test_csv_export():
    s = cayley_factor(LambdaGrid(16), 1)
    rows = list(csv.reader(io.StringIO(s.to_csv())))
    assert rows[0] == ["lambda", "re", "im", "arg"]
    assert len(rows) == 1 + 14 + 3
    assert float(rows[1][0]) == -np.inf and float(rows[-1][0]) == np.inf
    # unwrapped argument gains 2 pi along the closed path
    assert float(rows[-1][3]) - float(rows[1][3]) == pytest.approx(2 * np.pi)
