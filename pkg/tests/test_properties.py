import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from cherlb.baselines import poly_lb_central
from cherlb.chernoff import (
    SolverConfig,
    log_objective_noncentral,
    optimal_nu,
    solve_general,
    solve_noncentral,
    solve_noncentral_batch,
)
from cherlb.chi2 import (
    GeneralizedChiSquareSpec,
    NoncentralChiSquareSpec,
    noncentral_cdf,
    noncentral_cdf_array,
    noncentral_logcdf,
    noncentral_sf,
)
from cherlb.metrics import epsilon_from_lambda, lambda_for

dofs = st.integers(1, 24)
m2s = st.floats(0.0, 300.0)
variances = st.floats(0.05, 20.0)
epsilons = st.floats(-9.0, -1.0).map(lambda e: 10.0**e)
FINE = SolverConfig(delta_beta=1e-11)
TIGHT = SolverConfig(delta_beta=1e-300, relative=False)


@given(dofs, m2s, variances, epsilons)
def test_bound_is_conservative(K, M2, var, eps):
    spec = NoncentralChiSquareSpec(K, M2, var)
    r = solve_noncentral(spec, eps)
    assert 0 < r.bound < spec.mean()
    assert noncentral_cdf(spec, r.bound) <= eps * (1 + 1e-9)


@given(dofs, m2s, variances, epsilons, st.floats(0.05, 20.0))
def test_scale_equivariance(K, M2, var, eps, eta):
    a = solve_noncentral(NoncentralChiSquareSpec(K, M2, var), eps, FINE).bound
    b = solve_noncentral(NoncentralChiSquareSpec(K, eta * M2, eta * var), eps, FINE).bound
    assert math.isclose(b, eta * a, rel_tol=1e-6)


@given(dofs, m2s, variances, epsilons, st.floats(1.01, 10.0))
def test_monotone_in_epsilon(K, M2, var, eps, f):
    assume(eps * f < 0.5)
    spec = NoncentralChiSquareSpec(K, M2, var)
    assert solve_noncentral(spec, eps, TIGHT).bound < solve_noncentral(spec, eps * f, TIGHT).bound


@given(dofs, variances, epsilons, st.floats(0.0, 150.0), st.floats(0.5, 150.0))
def test_monotone_in_m2(K, var, eps, M2, dM2):
    lo = solve_noncentral(NoncentralChiSquareSpec(K, M2, var), eps, FINE).bound
    hi = solve_noncentral(NoncentralChiSquareSpec(K, M2 + dM2, var), eps, FINE).bound
    assert hi > lo


@given(dofs, m2s, variances, st.floats(0.01, 0.99))
def test_optimal_nu_minimizes(K, M2, var, frac):
    spec = NoncentralChiSquareSpec(K, M2, var)
    beta = frac * spec.mean()
    nu = optimal_nu(spec, beta)
    assert nu > 0
    best = log_objective_noncentral(spec, nu, beta)
    for d in (0.9, 0.99, 1.01, 1.1):
        assert log_objective_noncentral(spec, nu * d, beta) >= best - 1e-12 * abs(best)


@given(dofs, m2s, variances, st.floats(0.01, 3.0))
def test_cdf_in_unit_interval_and_complements(K, M2, var, frac):
    spec = NoncentralChiSquareSpec(K, M2, var)
    x = frac * spec.mean()
    F = noncentral_cdf(spec, x)
    assert 0.0 <= F <= 1.0
    assert math.isclose(F + noncentral_sf(spec, x), 1.0, abs_tol=1e-12)
    if F > 1e-300:
        assert math.isclose(noncentral_logcdf(spec, x), math.log(F), rel_tol=1e-9, abs_tol=1e-12)


@given(dofs, m2s, variances)
def test_cdf_array_matches_scalar(K, M2, var):
    spec = NoncentralChiSquareSpec(K, M2, var)
    x = np.linspace(0.05, 2.0, 7) * spec.mean()
    arr = noncentral_cdf_array(spec, x)
    # nondecreasing up to rounding at the top
    assert np.all(np.diff(arr) >= -1e-15)
    for xi, a in zip(x, arr):
        assert math.isclose(a, noncentral_cdf(spec, xi), rel_tol=1e-8, abs_tol=1e-14)


@given(dofs, st.floats(0.0, 300.0), epsilons)
def test_lambda_round_trip(K, rho, eps):
    lam = lambda_for(K, rho, eps, TIGHT)
    assert 0 < lam < 1
    assert math.isclose(epsilon_from_lambda(lam, rho, K), eps, rel_tol=1e-6)


@given(st.integers(1, 16), variances, epsilons)
def test_central_polynomial_bound_holds(K, var, eps):
    spec = NoncentralChiSquareSpec(K, 0.0, var)
    assert noncentral_cdf(spec, poly_lb_central(K, var, eps)) <= eps * (1 + 1e-9)


@given(st.lists(st.tuples(st.floats(0.0, 20.0), st.floats(0.1, 5.0)), min_size=1, max_size=5), epsilons)
def test_general_solver_objective_bounded(comps, eps):
    spec = GeneralizedChiSquareSpec(tuple(comps))
    r = solve_general(spec, eps)
    assert 0 < r.bound < spec.total_mean()
    assert r.objective_at_bound <= eps * (1 + 1e-9)


@given(dofs, st.lists(st.tuples(m2s, variances), min_size=1, max_size=6), epsilons)
def test_batch_equals_scalar(K, pairs, eps):
    M2 = np.array([p[0] for p in pairs])
    var = np.array([p[1] for p in pairs])
    batch = solve_noncentral_batch(K, M2, var, eps)
    for b, m, v in zip(batch, M2, var):
        assert b == solve_noncentral(NoncentralChiSquareSpec(K, m, v), eps).bound
