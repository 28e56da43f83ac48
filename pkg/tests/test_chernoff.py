import math

import numpy as np
import pytest

from cherlb.chernoff import (
    SolverConfig,
    central_log_rhs,
    inner_minimizer,
    objective_general,
    objective_noncentral,
    optimal_nu,
    solve_central,
    solve_general,
    solve_noncentral,
    solve_noncentral_batch,
    stationarity_residual,
    verify,
)
from cherlb.chi2 import GeneralizedChiSquareSpec, NoncentralChiSquareSpec, noncentral_cdf, numeric_quantile
from cherlb.errors import DomainError, IterationLimitError

TIGHT = SolverConfig(delta_beta=1e-300, relative=False)


def test_config_validation():
    for kw in ({"delta_beta": 0}, {"delta_nu": -1}, {"nu_ini": 0}, {"gamma": 1.0}, {"max_iters": 0}):
        with pytest.raises(DomainError):
            SolverConfig(**kw)
    assert SolverConfig().beta_tolerance(10.0) == pytest.approx(1e-3)
    assert SolverConfig(relative=False).beta_tolerance(10.0) == 1e-4


def test_objective_forms_agree():
    spec = NoncentralChiSquareSpec(4, 10.0, 1.5)
    for nu, beta in ((0.1, 2.0), (3.0, 0.5), (20.0, 10.0)):
        a = objective_noncentral(spec, nu, beta)
        b = objective_general(spec.as_general(), nu, beta)
        assert a == pytest.approx(b, rel=1e-13)
    with pytest.raises(DomainError):
        objective_noncentral(spec, 0.0, 1.0)


def test_objective_upper_bounds_cdf():
    spec = NoncentralChiSquareSpec(3, 5.0, 1.0)
    for beta in (0.1, 1.0, 3.0):
        for nu in (0.01, 0.5, 5.0):
            assert noncentral_cdf(spec, beta) <= objective_noncentral(spec, nu, beta)


def test_optimal_nu_is_stationary_and_minimal():
    spec = NoncentralChiSquareSpec(4, 100.0, 1.0)
    beta = 25.0
    nu = optimal_nu(spec, beta)
    assert abs(stationarity_residual(spec, nu, beta)) < 1e-12
    s = objective_noncentral(spec, nu, beta)
    for d in (0.999, 1.001):
        assert objective_noncentral(spec, nu * d, beta) >= s
    # central case: nu* = K/(2 beta) - 1/(2 var)
    c = NoncentralChiSquareSpec(6, 0.0, 2.0)
    assert optimal_nu(c, 1.0) == pytest.approx(6 / 2.0 - 0.25, rel=1e-14)
    with pytest.raises(DomainError):
        optimal_nu(spec, spec.mean())


def test_optimal_nu_near_mean_is_stable():
    spec = NoncentralChiSquareSpec(4, 100.0, 1.0)
    nu = optimal_nu(spec, spec.mean() * (1 - 1e-12))
    assert 0 < nu < 1e-10


def test_known_bound_value():
    spec = NoncentralChiSquareSpec(4, 100.0, 1.0)
    r = verify(solve_noncentral(spec, 1e-6), spec)
    assert r.bound == pytest.approx(25.2002, rel=2e-4)
    assert r.objective_at_bound <= 1e-6
    assert r.verified_cdf <= 1e-6
    assert r.bound < numeric_quantile(spec, 1e-6)
    assert r.method == "cherlb-noncentral"


def test_central_bound_solves_equation():
    r = solve_central(4, 1.0, 1e-6, TIGHT)
    assert abs(math.exp(central_log_rhs(4, 1.0, r.bound)) / 1e-6 - 1) < 1e-12
    # the polynomial bound of the central case is never below the Chernoff one
    assert r.bound <= 2 * (2e-6) ** 0.5


def test_general_solver_matches_noncentral():
    spec = NoncentralChiSquareSpec(6, 40.0, 0.8)
    a = solve_noncentral(spec, 1e-5)
    b = solve_general(spec.as_general(), 1e-5)
    assert b.bound == pytest.approx(a.bound, abs=2e-4 * spec.mean())
    assert b.iterations["loop1"] >= 0 and b.iterations["loop2"] > 0


def test_general_solver_unequal_variances_conservative():
    spec = GeneralizedChiSquareSpec(((3.0, 0.5), (1.0, 2.0), (0.0, 1.0)))
    r = solve_general(spec, 1e-4)
    assert r.objective_at_bound <= 1e-4 * (1 + 1e-12)
    # Monte Carlo sanity: the bound sits well inside the lower tail
    from cherlb.chi2 import sample

    x = sample(spec, 200_000, seed=3)
    assert np.mean(x < r.bound) < 1e-3


def test_inner_minimizer_matches_closed_form():
    spec = NoncentralChiSquareSpec(4, 30.0, 1.0)
    cfg = SolverConfig(delta_nu=1e-12)
    nu = inner_minimizer(spec.as_general(), 8.0, cfg)
    assert nu == pytest.approx(optimal_nu(spec, 8.0), rel=1e-9)


def test_tiny_epsilon_flagged():
    r = solve_noncentral(NoncentralChiSquareSpec(1, 0.0, 1.0), 1e-12)
    assert r.resolution_limited
    assert r.bound > 0
    assert noncentral_cdf(NoncentralChiSquareSpec(1, 0.0, 1.0), r.bound) <= 1e-12


def test_iteration_cap():
    with pytest.raises(IterationLimitError):
        solve_noncentral(NoncentralChiSquareSpec(4, 10.0, 1.0), 1e-6, SolverConfig(max_iters=3))


def test_batch_matches_scalar():
    M2 = np.array([0.0, 1.0, 10.0, 150.0])
    var = np.array([1.0, 0.5, 2.0, 1.0])
    batch = solve_noncentral_batch(4, M2, var, 1e-6)
    for b, m, v in zip(batch, M2, var):
        assert b == solve_noncentral(NoncentralChiSquareSpec(4, m, v), 1e-6).bound


def test_huge_rho():
    spec = NoncentralChiSquareSpec(4, 1e6, 1.0)
    r = solve_noncentral(spec, 1e-6)
    assert math.isfinite(r.bound) and 0 < r.bound < spec.mean()
