"""Chernoff lower bound on the outage threshold.

For a target eps, the bound b solves  eps = inf_{nu>0} s(nu, b)  with

    s(nu, b) = exp(nu * b) * E[exp(-nu * beta)],

which is increasing in b.  Any b with s(nu, b) <= eps for some nu > 0 has
F(b) <= eps, so every solver here returns the lower end of its final
bisection bracket.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .chi2 import (
    GeneralizedChiSquareSpec,
    NoncentralChiSquareSpec,
    as_epsilon,
    log_mgf_reciprocal,
    noncentral_cdf,
    _components,
)
from .errors import DomainError, IterationLimitError


@dataclass(frozen=True)
class SolverConfig:
    delta_beta: float = 1e-4
    delta_nu: float = 1e-9
    nu_ini: float = 1.0
    gamma: float = 2.0
    max_iters: int = 4000
    # delta_beta is a fraction of the distribution mean unless this is False
    relative: bool = True

    def __post_init__(self):
        if not self.delta_beta > 0:
            raise DomainError("delta_beta must be positive")
        if not self.delta_nu > 0:
            raise DomainError("delta_nu must be positive")
        if not self.nu_ini > 0:
            raise DomainError("nu_ini must be positive")
        if not self.gamma > 1:
            raise DomainError("gamma must exceed 1")
        if self.max_iters < 1:
            raise DomainError("max_iters must be >= 1")

    def beta_tolerance(self, mean):
        return self.delta_beta * mean if self.relative else self.delta_beta


@dataclass(frozen=True)
class BoundReport:
    bound: float
    nu_star: float
    objective_at_bound: float
    epsilon: float
    method: str
    iterations: dict = field(default_factory=dict)
    verified_cdf: float = None
    # True when the bound fell below the bisection resolution and was found
    # by geometric descent instead
    resolution_limited: bool = False


def verify(report, spec):
    """Attach the exact CDF at the bound."""
    if isinstance(spec, GeneralizedChiSquareSpec):
        spec = spec.as_noncentral()
    return replace(report, verified_cdf=noncentral_cdf(spec, report.bound))


# -- objectives ---------------------------------------------------------------

def log_objective_general(spec, nu, beta):
    return nu * beta + log_mgf_reciprocal(spec, nu)


def objective_general(spec, nu, beta):
    """s(nu, beta) for a generalized chi-squared spec."""
    if not nu > 0 or not beta > 0:
        raise DomainError("nu and beta must be positive")
    return math.exp(log_objective_general(spec, nu, beta))


def _log_objective_nc(K, M2, var, nu, beta):
    t = 2.0 * var * nu
    return nu * beta - nu * M2 / (1.0 + t) - 0.5 * K * np.log1p(t)


def log_objective_noncentral(spec, nu, beta):
    return float(_log_objective_nc(spec.K, spec.M2, spec.var, nu, beta))


def objective_noncentral(spec, nu, beta):
    if not nu > 0 or not beta > 0:
        raise DomainError("nu and beta must be positive")
    return math.exp(log_objective_noncentral(spec, nu, beta))


def _optimal_nu_nc(K, M2, var, beta):
    # 1 + 2 var nu solves beta*a^2 - K var a - M2 = 0; solve for x = a - 1 so
    # nothing cancels as beta approaches the mean (nu -> 0)
    gap = M2 + K * var - beta
    b = 2.0 * beta - K * var
    disc = np.sqrt(b * b + 4.0 * beta * gap)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(b > 0, 2.0 * gap / (b + disc), (disc - b) / (2.0 * beta))
    return x / (2.0 * var)


def optimal_nu(spec, beta):
    """Closed-form minimizer of s(., beta) for the equal-variance case."""
    if not 0 < beta < spec.mean():
        raise DomainError(f"beta must lie in (0, {spec.mean():g}) for a nontrivial bound")
    return float(_optimal_nu_nc(spec.K, spec.M2, spec.var, beta))


def stationarity_residual(spec, nu, beta):
    a = 1.0 + 2.0 * spec.var * nu
    return beta - (spec.M2 / a**2 + spec.K * spec.var / a)


def log_objective_derivative_factor(spec, nu, beta):
    """d s / d nu divided by s: beta - sum[mu^2/(1+t)^2 + var/(1+t)]."""
    mu2, var = _components(spec)
    a = 1.0 + 2.0 * var * nu
    return float(beta - np.sum(mu2 / a**2 + var / a))


# -- non-central solver (closed-form inner step) ------------------------------

def _bisect_noncentral(K, M2, var, log_eps, tol, max_iters):
    """Vectorized bisection on b -> s(nu*(b), b) over (0, mean).

    Returns (bound, outer_iterations, resolution_limited) arrays.
    """
    M2, var, tol, K, log_eps = (
        np.array(v, dtype=float) for v in np.broadcast_arrays(*map(np.atleast_1d, (M2, var, tol, K, log_eps)))
    )

    def g(b, idx):
        nu = _optimal_nu_nc(K[idx], M2[idx], var[idx], b)
        return _log_objective_nc(K[idx], M2[idx], var[idx], nu, b)

    lo = np.zeros(M2.shape)
    hi = M2 + K * var
    iters = np.zeros(M2.shape, dtype=int)
    stuck = np.zeros(M2.shape, dtype=bool)
    active = hi - lo > tol
    while np.any(active):
        idx = np.nonzero(active)[0]
        mid = 0.5 * (lo[idx] + hi[idx])
        # stop where the bracket can no longer be split in floating point
        split = (mid > lo[idx]) & (mid < hi[idx])
        over = g(mid, idx) > log_eps[idx]
        hi[idx] = np.where(split & over, mid, hi[idx])
        lo[idx] = np.where(split & ~over, mid, lo[idx])
        iters[idx] += split
        if np.any(iters > max_iters):
            raise IterationLimitError("beta bisection exceeded iteration cap")
        stuck[idx[~split]] = True
        active = (hi - lo > tol) & ~stuck

    limited = lo == 0.0
    if np.any(limited):
        # eps too small for the bracket resolution: halve down to a valid point
        idx = np.nonzero(limited)[0]
        b = np.array(hi[idx], dtype=float)
        steps = 0
        pending = g(b, idx) > log_eps[idx]
        while np.any(pending):
            b = np.where(pending, 0.5 * b, b)
            steps += 1
            if steps > max_iters or np.any(b == 0.0):
                raise IterationLimitError("geometric descent exceeded iteration cap")
            pending = g(b, idx) > log_eps[idx]
        lo[idx] = b
    return lo, iters, limited


def solve_noncentral(spec, target, cfg=None):
    """Chernoff lower bound for a non-central chi-squared spec."""
    cfg = cfg or SolverConfig()
    if isinstance(spec, GeneralizedChiSquareSpec):
        spec = spec.as_noncentral()
    eps = as_epsilon(target)
    tol = cfg.beta_tolerance(spec.mean())
    b, iters, limited = _bisect_noncentral(spec.K, spec.M2, spec.var, math.log(eps), tol, cfg.max_iters)
    bound = float(b[0])
    nu = optimal_nu(spec, bound)
    return BoundReport(
        bound=bound,
        nu_star=nu,
        objective_at_bound=objective_noncentral(spec, nu, bound),
        epsilon=eps,
        method="cherlb-noncentral",
        iterations={"outer": int(iters[0])},
        resolution_limited=bool(limited[0]),
    )


def solve_noncentral_batch(K, M2, var, target, cfg=None):
    """Bounds for arrays of (M2, var) sharing K and eps."""
    cfg = cfg or SolverConfig()
    eps = as_epsilon(target)
    M2 = np.asarray(M2, dtype=float)
    var = np.asarray(var, dtype=float)
    if np.any(var <= 0) or np.any(M2 < 0):
        raise DomainError("need var > 0 and M2 >= 0")
    mean = M2 + K * var
    tol = cfg.delta_beta * mean if cfg.relative else np.full(mean.shape, cfg.delta_beta)
    b, _, _ = _bisect_noncentral(K, M2.ravel(), var.ravel(), math.log(eps), tol.ravel(), cfg.max_iters)
    return b.reshape(M2.shape)


# -- generalized solver (2-D line search) -------------------------------------

def _bisect_increasing(log_fn, upper, log_eps, tol, max_iters):
    lo, hi, outer = 0.0, upper, 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if log_fn(mid) > log_eps:
            hi = mid
        else:
            lo = mid
        outer += 1
        if outer > max_iters:
            raise IterationLimitError("beta bisection exceeded iteration cap")
    limited = lo == 0.0
    if limited:
        b, steps = hi, 0
        while log_fn(b) > log_eps:
            b *= 0.5
            steps += 1
            if steps > max_iters or b == 0.0:
                raise IterationLimitError("geometric descent exceeded iteration cap")
        lo = b
    return lo, outer, limited


def inner_minimizer(spec, beta, cfg, counts=None):
    """Line search for the nu minimizing s(., beta), on the derivative sign."""
    nu_low, nu_up = 0.0, cfg.nu_ini
    loop1 = loop2 = 0
    while log_objective_derivative_factor(spec, nu_up, beta) < 0:
        nu_up *= cfg.gamma
        loop1 += 1
        if loop1 > cfg.max_iters:
            raise IterationLimitError("nu bracket growth exceeded iteration cap")
    while nu_up - nu_low > cfg.delta_nu:
        nu_mid = 0.5 * (nu_low + nu_up)
        if not nu_low < nu_mid < nu_up:
            break
        if log_objective_derivative_factor(spec, nu_mid, beta) >= 0:
            nu_up = nu_mid
        else:
            nu_low = nu_mid
        loop2 += 1
        if loop2 > cfg.max_iters:
            raise IterationLimitError("nu bisection exceeded iteration cap")
    if counts is not None:
        counts["loop1"] += loop1
        counts["loop2"] += loop2
    return 0.5 * (nu_low + nu_up)


def solve_general(spec, target, cfg=None):
    """Chernoff lower bound for a generalized chi-squared spec."""
    cfg = cfg or SolverConfig()
    if isinstance(spec, NoncentralChiSquareSpec):
        spec = spec.as_general()
    eps = as_epsilon(target)
    mean = spec.total_mean()
    counts = {"loop1": 0, "loop2": 0}

    def log_g(b):
        nu = inner_minimizer(spec, b, cfg, counts)
        return log_objective_general(spec, nu, b)

    bound, outer, limited = _bisect_increasing(log_g, mean, math.log(eps), cfg.beta_tolerance(mean), cfg.max_iters)
    nu = inner_minimizer(spec, bound, cfg)
    return BoundReport(
        bound=bound,
        nu_star=nu,
        objective_at_bound=objective_general(spec, nu, bound),
        epsilon=eps,
        method="cherlb-general",
        iterations={"outer": outer, **counts},
        resolution_limited=limited,
    )


# -- central case --------------------------------------------------------------

def central_log_rhs(K, var, beta):
    """log of exp(K/2 - b/(2 var)) * (b/(K var))^(K/2)."""
    return 0.5 * K - beta / (2.0 * var) + 0.5 * K * math.log(beta / (K * var))


def solve_central(K, var, target, cfg=None):
    """Chernoff lower bound for a central chi-squared with K dof, scale var."""
    cfg = cfg or SolverConfig()
    if int(K) != K or K < 1 or not var > 0:
        raise DomainError("need integer K >= 1 and var > 0")
    eps = as_epsilon(target)
    mean = K * var
    bound, outer, limited = _bisect_increasing(
        lambda b: central_log_rhs(K, var, b), mean, math.log(eps), cfg.beta_tolerance(mean), cfg.max_iters
    )
    return BoundReport(
        bound=bound,
        nu_star=K / (2.0 * bound) - 1.0 / (2.0 * var),
        objective_at_bound=math.exp(central_log_rhs(K, var, bound)),
        epsilon=eps,
        method="cherlb-central",
        iterations={"outer": outer},
        resolution_limited=limited,
    )
