import math

import numpy as np
import pytest

from cherlb.chernoff import SolverConfig, solve_noncentral
from cherlb.chi2 import NoncentralChiSquareSpec
from cherlb.errors import DomainError
from cherlb.metrics import (
    check_scaling,
    closeness,
    diversity_equivalent_epsilon,
    epsilon_from_lambda,
    epsilon_sensitivity,
    lambda_for,
    log_epsilon_from_lambda,
    scaled_nu_ratio,
)

FINE = SolverConfig(delta_beta=1e-11)


def test_closeness_midpoint():
    spec = NoncentralChiSquareSpec(4, 6.0, 1.0)
    rep = closeness(spec, spec.mean() / 2)
    assert rep.lam == 0.5 and rep.K == 4 and rep.rho == 6.0
    assert rep.rho_per_dof == 1.5
    with pytest.raises(DomainError):
        closeness(spec, spec.mean())
    with pytest.raises(DomainError):
        closeness(spec, 0.0)


def test_lambda_on_closeness_curve():
    lam = lambda_for(8, 150.0, 1e-6)
    spec = NoncentralChiSquareSpec(8, 150.0, 1.0)
    assert lam == pytest.approx(solve_noncentral(spec, 1e-6).bound / spec.mean())
    assert 0.3 < lam < 0.5


def test_lambda_tends_to_one():
    assert lambda_for(4, 10.0, 1 - 1e-9) > 0.999
    assert epsilon_from_lambda(1 - 1e-9, 10.0, 4) == pytest.approx(1.0, abs=1e-12)


def test_round_trip_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        K = int(rng.integers(1, 25))
        rho = float(rng.uniform(0, 300))
        eps = float(10 ** rng.uniform(-9, -1))
        lam = lambda_for(K, rho, eps, FINE)
        assert epsilon_from_lambda(lam, rho, K) / eps == pytest.approx(1.0, rel=1e-6)


def test_log_epsilon_linear_in_K_at_fixed_rho_o():
    lam, rho_o = 0.4, 50.0
    vals = [log_epsilon_from_lambda(lam, rho_o * K, K) for K in (2, 4, 6, 8)]
    steps = np.diff(vals)
    assert np.allclose(steps, steps[0], rtol=1e-12)


def test_sensitivity_matches_finite_differences():
    for K, rho in ((4, 10.0), (8, 150.0), (24, 0.0)):
        for lam in np.linspace(0.05, 0.95, 20):
            h = 1e-6 * lam
            fd = (math.log10(epsilon_from_lambda(lam + h, rho, K)) - math.log10(epsilon_from_lambda(lam - h, rho, K))) / (2 * h)
            assert epsilon_sensitivity(lam, rho, K) == pytest.approx(fd, rel=1e-6)


def test_sensitivity_positive_decreasing_divergent():
    lams = np.linspace(0.01, 0.99, 50)
    vals = [epsilon_sensitivity(l, 100.0, 8) for l in lams]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert epsilon_sensitivity(1e-6, 100.0, 8) > 1e5


def test_scaling_law():
    spec = NoncentralChiSquareSpec(4, 10.0, 1.0)
    assert check_scaling(spec, 1.0, 1e-6) == 0.0
    for eta in (0.1, 3.0, 10.0):
        assert check_scaling(spec, eta, 1e-6) <= 2e-4
        assert scaled_nu_ratio(spec, 3.0, eta) == pytest.approx(1.0, abs=1e-12)


def test_diversity_equivalent_epsilon():
    assert diversity_equivalent_epsilon(2, 1e-3) == pytest.approx(1e-3)
    assert diversity_equivalent_epsilon(4, 1e-2) == pytest.approx(1e-1)
    with pytest.raises(DomainError):
        diversity_equivalent_epsilon(0, 0.1)


def test_diversity_chain():
    lams = [lambda_for(K, 50.0 * K, 10.0 ** (-K / 2)) for K in (2, 4, 6)]
    assert max(lams) - min(lams) <= 1e-3
    for m in (2, 3):
        assert abs(lambda_for(4, 200.0, 1e-3) - lambda_for(4 * m, 200.0 * m, 1e-3**m)) <= 1e-3


def test_monotone_in_rho_and_epsilon():
    lam = [lambda_for(8, rho, 1e-6) for rho in (1, 10, 50, 150, 300)]
    assert all(a < b for a, b in zip(lam, lam[1:]))
    lam = [lambda_for(8, 100.0, eps) for eps in (1e-9, 1e-7, 1e-5, 1e-3, 1e-1)]
    assert all(a < b for a, b in zip(lam, lam[1:]))


def test_slope_flattening():
    for rho in (100.0, 400.0, 1200.0):
        deep = lambda_for(8, rho, 1e-5) - lambda_for(8, rho, 1e-9)
        shallow = lambda_for(8, rho, 1e-1) - lambda_for(8, rho, 1e-5)
        assert deep <= shallow
