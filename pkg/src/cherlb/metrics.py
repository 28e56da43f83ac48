"""Closeness of the bound to the mean and the relations built on it.

With the scale normalized away, beta = lam * (rho + K) and the optimal
nu satisfies beta a^2 - K a - rho = 0 for a = 1 + 2 nu.  Writing
D = K^2 + 4 lam rho (rho + K),

    1/a = 2 lam (rho + K) / (K + sqrt(D)),

which stays finite at rho = 0.  Everything below is expressed through a.
"""

from dataclasses import dataclass
import math

from .chernoff import SolverConfig, optimal_nu, solve_noncentral
from .chi2 import NoncentralChiSquareSpec, as_epsilon
from .errors import DomainError

LN10 = math.log(10.0)


@dataclass(frozen=True)
class ClosenessReport:
    rho: float
    lam: float
    epsilon: float
    K: int

    @property
    def rho_per_dof(self):
        return self.rho / self.K


def closeness(spec, bound, epsilon=None):
    """lam = bound / (M2 + K var).  ``epsilon`` defaults to the value implied by lam."""
    mean = spec.mean()
    if not 0.0 < bound < mean:
        raise DomainError(f"bound must lie in (0, {mean:g})")
    lam = bound / mean
    if epsilon is None:
        epsilon = epsilon_from_lambda(lam, spec.rho, spec.K)
    return ClosenessReport(rho=spec.rho, lam=lam, epsilon=float(epsilon), K=spec.K)


def lambda_for(K, rho, target, cfg=None):
    """Closeness of the Chernoff bound for unit variance."""
    spec = NoncentralChiSquareSpec(K, rho, 1.0)
    return solve_noncentral(spec, target, cfg).bound / spec.mean()


def _check_lambda(lam):
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")


def _inv_a(lam, rho, K):
    root_d = math.sqrt(K * K + 4.0 * lam * rho * (rho + K))
    return 2.0 * lam * (rho + K) / (K + root_d), root_d


def log_epsilon_from_lambda(lam, rho, K):
    _check_lambda(lam)
    inv_a, _ = _inv_a(lam, rho, K)
    beta = lam * (rho + K)
    x = 1.0 / inv_a - 1.0  # a - 1 = 2 nu
    return 0.5 * x * beta - 0.5 * x * rho * inv_a + 0.5 * K * math.log(inv_a)


def epsilon_from_lambda(lam, rho, K):
    """Outage level whose Chernoff bound sits at lam * mean."""
    return math.exp(log_epsilon_from_lambda(lam, rho, K))


def epsilon_sensitivity(lam, rho, K):
    """d log10(eps) / d lam.

    By the envelope theorem d ln(eps)/d beta = nu*, so the derivative is
    (rho + K) nu* / ln 10 = [(K + sqrt(D)) / (2 lam) - (rho + K)] / (2 ln 10).
    """
    _check_lambda(lam)
    _, root_d = _inv_a(lam, rho, K)
    return ((K + root_d) / (2.0 * lam) - (rho + K)) / (2.0 * LN10)


def check_scaling(spec, eta, target, cfg=None):
    """Relative deviation of solve(eta M2, eta var) from eta * solve(M2, var)."""
    if not eta > 0:
        raise DomainError("eta must be positive")
    cfg = cfg or SolverConfig()
    base = solve_noncentral(spec, target, cfg).bound
    scaled = solve_noncentral(NoncentralChiSquareSpec(spec.K, eta * spec.M2, eta * spec.var), target, cfg).bound
    return abs(scaled - eta * base) / (eta * base)


def scaled_nu_ratio(spec, beta, eta):
    """eta * nu*(eta beta; eta M2, eta var) / nu*(beta; M2, var); exactly 1 in theory."""
    scaled = NoncentralChiSquareSpec(spec.K, eta * spec.M2, eta * spec.var)
    return eta * optimal_nu(scaled, eta * beta) / optimal_nu(spec, beta)


def diversity_equivalent_epsilon(K, epsilon):
    """eps^(2/K): the per-pair outage level an order-K link effectively faces."""
    eps = as_epsilon(epsilon)
    if int(K) != K or K < 1:
        raise DomainError("K must be a positive integer")
    return eps ** (2.0 / K)
