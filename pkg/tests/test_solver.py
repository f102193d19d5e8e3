import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wienerhopf.errors import AllModesDropped
from wienerhopf.kernel import (
    ExpPolyHalf,
    KernelSpec,
    Level,
    Term,
    build_K1_from_K0,
    build_K_from_K1,
    gamma_family,
    two_sided_exp,
)
from wienerhopf.solver import (
    TSVD,
    DiscretizedOperator,
    Tikhonov,
    convolve_closed_form,
    discretize,
    estimate_null_dim,
    manufacture_rhs,
    solve_regularized,
)

K_GAMMA0 = build_K_from_K1(gamma_family(0.0))
K_TWO_SIDED = build_K_from_K1(build_K1_from_K0(two_sided_exp()))
PHI = ExpPolyHalf([Term(1.0, 0, 1.0)])


def test_requires_level_K():
    with pytest.raises(ValueError):
        discretize(gamma_family(0.0), 10.0, 32)


def test_volterra_kernel_gives_lower_triangular_matrix():
    A = discretize(K_GAMMA0, 10.0, 64)
    assert np.all(np.triu(A.matrix, 1) == 0)
    assert np.isrealobj(A.matrix)
    # diagonal carries half the jump
    assert A.matrix[0, 0] == pytest.approx(0.5 * A.weights[0])


def test_zero_kernel_gives_zero_matrix():
    A = discretize(KernelSpec(Level.K), 10.0, 32)
    assert not np.any(A.matrix)


@pytest.mark.parametrize("rule", ["midpoint", "trapezoid", "simpson"])
def test_even_kernel_is_symmetric_up_to_weights(rule):
    A = discretize(K_TWO_SIDED, 10.0, 65, rule)
    unweighted = A.matrix / A.weights[None, :]
    np.testing.assert_allclose(unweighted, unweighted.T, rtol=1e-15)


@pytest.mark.parametrize("K, f", [
    (K_GAMMA0, lambda t: t * np.exp(-t)),
    (K_TWO_SIDED, lambda t: 0.5 * t * np.exp(-t) + 0.25 * np.exp(-t)),
])
def test_closed_form_rhs(K, f):
    t = np.linspace(0, 30, 31)
    np.testing.assert_allclose(convolve_closed_form(K, PHI, t), f(t), atol=1e-15)


exp_terms = st.builds(Term, st.floats(-2, 2).filter(lambda c: abs(c) > 1e-2), st.integers(0, 2),
                      st.floats(0.3, 3.0))


@settings(max_examples=25, deadline=None)
@given(st.lists(exp_terms, min_size=1, max_size=2), st.lists(exp_terms, max_size=2),
       st.lists(exp_terms, min_size=1, max_size=2), st.floats(0.0, 15.0))
def test_closed_form_convolution_matches_quadrature(pos, neg, phi_terms, t):
    K = KernelSpec(Level.K, pos, neg)
    phi = ExpPolyHalf(phi_terms)
    left, _ = quad(lambda s: K.pos(t - s) * phi(s), 0, t, epsabs=1e-13, limit=200) if t > 0 else (0.0, 0)
    right, _ = quad(lambda s: K.neg(s - t) * phi(s), t, np.inf, epsabs=1e-13, limit=200)
    scale = 1 + K.pos.scale + K.neg.scale + phi.scale
    assert convolve_closed_form(K, phi, np.array([t]))[0] == pytest.approx(left + right, abs=1e-9 * scale**2)


@pytest.mark.parametrize("K", [K_GAMMA0, K_TWO_SIDED, build_K_from_K1(gamma_family(-1.0)),
                               build_K_from_K1(gamma_family(-3.0))])
def test_discretization_is_consistent_with_closed_form(K):
    A = discretize(K, 40.0, 1024)
    m = manufacture_rhs(A, A.grid_function(np.exp(-A.t)), K, PHI)
    assert m.consistency <= 1e-3


def test_consistency_improves_under_refinement():
    errs = []
    for n in (256, 512):
        A = discretize(K_TWO_SIDED, 40.0, n)
        errs.append(manufacture_rhs(A, A.grid_function(np.exp(-A.t)), K_TWO_SIDED, PHI).consistency)
    assert errs[1] < errs[0] / 3


def test_zero_rhs_gives_zero_solution():
    A = discretize(K_TWO_SIDED, 40.0, 128)
    res = solve_regularized(A, A.grid_function(np.zeros(128)))
    assert not np.any(res.solution.samples) and res.residual_norm == 0


def test_residual_is_recomputed():
    A = discretize(K_TWO_SIDED, 40.0, 256)
    f = A.grid_function(0.5 * A.t * np.exp(-A.t) + 0.25 * np.exp(-A.t))
    res = solve_regularized(A, f, TSVD(rank=10))
    direct = A.grid_function(A.matrix @ res.solution.samples - f.samples).norm()
    assert res.residual_norm == pytest.approx(direct, rel=1e-12)
    assert res.kept_modes == 10


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 60))
def test_truncation_residual_bound(rank):
    # residual of the truncated solve <= least-squares residual + energy in the dropped modes
    A = discretize(K_TWO_SIDED, 20.0, 64)
    f = A.grid_function(np.cos(A.t) * np.exp(-0.3 * A.t))
    U, s, _ = np.linalg.svd(A.matrix)
    coeffs = U.T @ f.samples
    w = A.weights
    res = solve_regularized(A, f, TSVD(rank=rank))
    full = solve_regularized(A, f, TSVD(threshold=0.0))
    dropped = A.grid_function(U[:, rank:] @ coeffs[rank:]).norm()
    assert res.residual_norm <= full.residual_norm + dropped + 1e-12
    assert np.all(w > 0)


def test_recovery_is_stable_under_refinement():
    errs = []
    for n in (512, 1024):
        A = discretize(K_TWO_SIDED, 40.0, n)
        f = A.grid_function(0.5 * A.t * np.exp(-A.t) + 0.25 * np.exp(-A.t))
        res = solve_regularized(A, f)
        phi = np.exp(-A.t)
        errs.append((res.solution - A.grid_function(phi)).norm() / A.grid_function(phi).norm())
    assert errs[1] <= 2 * errs[0]


def test_tikhonov_recovers_volterra_solution():
    A = discretize(K_GAMMA0, 40.0, 512)
    f = A.grid_function(A.t * np.exp(-A.t))
    res = solve_regularized(A, f, Tikhonov(1e-10))
    phi = A.grid_function(np.exp(-A.t))
    assert (res.solution - phi).norm() / phi.norm() < 1e-6
    assert res.diagnostics()["regularization"] == {"method": "tikhonov", "parameter": 1e-10}


def test_all_modes_dropped():
    A = discretize(K_TWO_SIDED, 40.0, 64)
    with pytest.raises(AllModesDropped):
        solve_regularized(A, A.grid_function(np.exp(-A.t)), TSVD(rank=0))


def test_null_dim_of_zero_operator():
    A = discretize(KernelSpec(Level.K), 10.0, 32)
    est = estimate_null_dim(A)
    assert est.count == 32 and est.confidence == "high" and len(est.basis) == 32


def test_null_dim_with_constructed_gap():
    M = np.eye(32)
    M[5, 5] = 0.0
    A = DiscretizedOperator(10.0, 32, M, np.full(32, 10.0 / 32))
    est = estimate_null_dim(A)
    assert est.count == 1 and est.confidence == "high"
    np.testing.assert_allclose(np.abs(est.basis[0].samples), np.eye(32)[5])


def test_null_dim_of_compact_operator_is_low_confidence():
    A = discretize(K_GAMMA0, 40.0, 256)
    est = estimate_null_dim(A)
    assert est.confidence == "low"


def test_solution_csv():
    A = discretize(K_GAMMA0, 40.0, 32)
    res = solve_regularized(A, A.grid_function(A.t * np.exp(-A.t)))
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert rows[0] == ["t", "re", "im"] and len(rows) == 33
    assert float(rows[1][0]) == pytest.approx(40.0 / 64)
