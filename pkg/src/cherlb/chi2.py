"""Generalized and non-central chi-squared distributions.

Exact CDF/CCDF via the Poisson mixture of central chi-squared CDFs, a seeded
sampler, and numeric/empirical quantiles.  These are the ground-truth oracles
every bound in the package is checked against.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, ndtr

from . import _streams
from .errors import DomainError, InsufficientSamplesError, IterationLimitError

SAMPLE_CHUNK = 1 << 16


@dataclass(frozen=True)
class GeneralizedChiSquareSpec:
    """beta = sum_k alpha_k**2 with alpha_k ~ N(mu_k, var_k), independent."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(mu), float(var)) for mu, var in self.components)
        if not comps:
            raise DomainError("need at least one component")
        if any(not var > 0 for _, var in comps):
            raise DomainError("component variances must be positive")
        if any(not math.isfinite(mu) for mu, _ in comps):
            raise DomainError("component means must be finite")
        object.__setattr__(self, "components", comps)

    @property
    def K(self):
        return len(self.components)

    @property
    def means(self):
        return np.array([mu for mu, _ in self.components])

    @property
    def variances(self):
        return np.array([var for _, var in self.components])

    def total_mean(self):
        return float(np.sum(self.means**2 + self.variances))

    def is_equal_variance(self, rtol=1e-15):
        v = self.variances
        return bool(np.all(np.abs(v - v[0]) <= rtol * v[0]))

    def as_noncentral(self):
        if not self.is_equal_variance():
            raise DomainError("components have different variances")
        return NoncentralChiSquareSpec(self.K, float(np.sum(self.means**2)), float(self.variances[0]))


@dataclass(frozen=True)
class NoncentralChiSquareSpec:
    """Equal-variance case: K degrees of freedom, noncentrality M2, scale var."""

    K: int
    M2: float
    var: float

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise DomainError(f"K must be a positive integer, got {self.K}")
        if not self.var > 0 or not math.isfinite(self.var):
            raise DomainError(f"var must be positive, got {self.var}")
        if not self.M2 >= 0 or not math.isfinite(self.M2):
            raise DomainError(f"M2 must be nonnegative, got {self.M2}")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "M2", float(self.M2))
        object.__setattr__(self, "var", float(self.var))

    @property
    def rho(self):
        return self.M2 / self.var

    def mean(self):
        return self.M2 + self.K * self.var

    total_mean = mean

    def as_general(self):
        comps = [(math.sqrt(self.M2), self.var)] + [(0.0, self.var)] * (self.K - 1)
        return GeneralizedChiSquareSpec(tuple(comps))


@dataclass(frozen=True)
class ReliabilityTarget:
    epsilon: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not 0.0 < eps < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def epsilon_log10(self):
        return math.log10(self.epsilon)

    @classmethod
    def from_log10(cls, value):
        return cls(10.0**value)


def as_epsilon(target):
    if isinstance(target, ReliabilityTarget):
        return target.epsilon
    return ReliabilityTarget(target).epsilon


def _components(spec):
    """(mu_k**2, var_k) arrays for either spec type."""
    if isinstance(spec, NoncentralChiSquareSpec):
        mu2 = np.zeros(spec.K)
        mu2[0] = spec.M2
        return mu2, np.full(spec.K, spec.var)
    return spec.means**2, spec.variances


def _as_noncentral(spec):
    if isinstance(spec, NoncentralChiSquareSpec):
        return spec
    return spec.as_noncentral()


def log_mgf_reciprocal(spec, nu):
    if nu < 0:
        raise DomainError("nu must be nonnegative")
    mu2, var = _components(spec)
    t = 2.0 * var * nu
    return float(-0.5 * np.sum(np.log1p(t)) - np.sum(mu2 * nu / (1.0 + t)))


def mgf_reciprocal(spec, nu):
    """E[exp(-nu * beta)]."""
    return math.exp(log_mgf_reciprocal(spec, nu))


# -- incomplete gamma in log domain ------------------------------------------

def _log_gammainc_lower(a, y):
    """log P(a, y), regularized lower incomplete gamma, elementwise over ``a``.

    scipy's value is used unless it underflows; deep in the lower tail the
    power series is summed in log domain instead.
    """
    a = np.asarray(a, dtype=float)
    if y <= 0:
        return np.full(a.shape, -np.inf)
    p = gammainc(a, y)
    out = np.full(a.shape, -np.inf)
    ok = p > 1e-280
    out[ok] = np.log(p[ok])
    bad = ~ok
    if np.any(bad):
        ab = a[bad]
        term = np.ones_like(ab)
        total = np.ones_like(ab)
        for n in range(1, 5000):
            term = term * y / (ab + n)
            total += term
            if np.all(term < 1e-17 * total):
                break
        out[bad] = ab * math.log(y) - y - gammaln(ab + 1.0) + np.log(total)
    return out


def _logsumexp(v):
    m = np.max(v)
    if not np.isfinite(m):
        return m
    return float(m + math.log(math.fsum(np.exp(v - m))))


def _poisson_mixture_log(spec, x, upper):
    """log of sum_j Pois(j; mu) * G(K/2 + j, x / (2 var)).

    G is the lower regularized gamma (``upper=False``) or the upper one.
    Terms are taken from j = 0 (in the lower tail the dominant term sits below
    the Poisson mode) up to an index past which the remaining mass is bounded
    below 1e-17 of the partial sum.
    """
    y = x / (2.0 * spec.var)
    mu = spec.M2 / (2.0 * spec.var)
    a0 = 0.5 * spec.K

    def log_g(a):
        if upper:
            q = gammaincc(a, y)
            with np.errstate(divide="ignore"):
                return np.log(q)
        return _log_gammainc_lower(a, y)

    if mu == 0.0:
        return float(log_g(np.array([a0]))[0])

    jhi = int(math.ceil(mu + 12.0 * math.sqrt(mu) + 40.0))
    while True:
        j = np.arange(jhi + 1, dtype=float)
        lw = -mu + j * math.log(mu) - gammaln(j + 1.0)
        lt = lw + log_g(a0 + j)
        total = _logsumexp(lt)
        r = mu / (jhi + 1.0)
        if r < 0.5:
            # remaining terms bounded by a geometric series
            anchor = lw[-1] if upper else lt[-1]
            tail = anchor + math.log(r / (1.0 - r))
            if total == -np.inf or tail < total + math.log(1e-17):
                return total
        jhi *= 2
        if jhi > 1e8:
            raise IterationLimitError("Poisson mixture did not converge")


def noncentral_logcdf(spec, x):
    spec = _as_noncentral(spec)
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0:
        return -np.inf
    # truncation rounding can nudge the sum a hair past 1
    return min(0.0, _poisson_mixture_log(spec, float(x), upper=False))


def noncentral_cdf(spec, x):
    """P(beta <= x), equivalently 1 - Q_{K/2}(M/sigma, sqrt(x)/sigma)."""
    return min(1.0, math.exp(noncentral_logcdf(spec, x)))


def noncentral_cdf_array(spec, x, block=8192):
    """Vectorized CDF for bulk evaluation (goodness-of-fit tests).

    Linear-domain Poisson mixture with absolute error ~1e-15; use
    ``noncentral_logcdf`` for deep lower tails.
    """
    spec = _as_noncentral(spec)
    x = np.asarray(x, dtype=float)
    flat = np.clip(x.ravel(), 0.0, None) / (2.0 * spec.var)
    mu = spec.M2 / (2.0 * spec.var)
    a0 = 0.5 * spec.K
    if mu == 0.0:
        return gammainc(a0, flat).reshape(x.shape)
    if spec.K == 1:
        # square of a single N(M, var) variable
        r = np.sqrt(flat * 2.0)
        m = math.sqrt(spec.M2 / spec.var)
        return (ndtr(r - m) - ndtr(-r - m)).reshape(x.shape)
    jlo = max(0, int(math.floor(mu - 12.0 * math.sqrt(mu) - 40.0)))
    jhi = int(math.ceil(mu + 12.0 * math.sqrt(mu) + 40.0))
    j = np.arange(jlo, jhi + 1, dtype=float)
    weights = np.exp(-mu + j * math.log(mu) - gammaln(j + 1.0))
    out = np.empty_like(flat)
    for start in range(0, flat.size, block):
        y = flat[start : start + block]
        out[start : start + block] = gammainc(a0 + j[None, :], y[:, None]) @ weights
    # Poisson mass outside [jlo, jhi] is far below double precision
    return np.minimum(out, 1.0).reshape(x.shape)


def noncentral_sf(spec, x):
    spec = _as_noncentral(spec)
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0:
        return 1.0
    return min(1.0, math.exp(_poisson_mixture_log(spec, float(x), upper=True)))


def marcum_q(half_order, a, b):
    """Generalized Marcum Q-function Q_m(a, b) for half-integer order m."""
    twice = 2.0 * half_order
    if half_order <= 0 or abs(twice - round(twice)) > 1e-12:
        raise DomainError(f"order must be a positive half-integer, got {half_order}")
    if a < 0 or b < 0:
        raise DomainError("a and b must be nonnegative")
    if b == 0:
        return 1.0
    return noncentral_sf(NoncentralChiSquareSpec(int(round(twice)), a * a, 1.0), b * b)


def sample(spec, n, seed, workers=None):
    """n i.i.d. draws of beta; draw i depends only on (seed, i)."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if isinstance(spec, NoncentralChiSquareSpec):
        spec = spec.as_general()
    mu = spec.means
    sd = np.sqrt(spec.variances)

    def chunk(c, start, stop):
        z = _streams.chunk_rng(seed, _streams.STREAM_CHI2, c).standard_normal((stop - start, mu.size))
        return np.sum((mu + sd * z) ** 2, axis=1)

    return np.concatenate(_streams.map_chunks(chunk, n, SAMPLE_CHUNK, workers))


def numeric_quantile(spec, target, rtol=1e-12, max_iters=400):
    """beta_T with |F(beta_T) - eps| <= rtol * eps, by bracketing + bisection."""
    spec = _as_noncentral(spec)
    eps = as_epsilon(target)
    log_eps = math.log(eps)

    def resid(x):
        return noncentral_logcdf(spec, x) - log_eps

    hi = spec.mean()
    iters = 0
    while resid(hi) < 0:
        hi *= 2.0
        iters += 1
        if iters > max_iters:
            raise IterationLimitError("upper bracket growth exceeded iteration cap")
    lo = hi / 2.0
    while resid(lo) >= 0:
        hi = lo
        lo /= 2.0
        iters += 1
        if iters > max_iters or lo == 0.0:
            raise IterationLimitError("lower bracket search exceeded iteration cap")

    # |log F - log eps| <= rtol/2 guarantees the relative CDF tolerance
    tol = 0.5 * rtol
    best, best_r = lo, resid(lo)
    while iters <= max_iters:
        mid = math.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        r = resid(mid)
        if abs(r) < abs(best_r):
            best, best_r = mid, r
        if abs(r) <= tol:
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid
        iters += 1
    if abs(math.expm1(best_r)) <= rtol:
        return best
    raise IterationLimitError("quantile bisection did not reach tolerance")


def empirical_quantile(samples, epsilon, min_tail_count=100):
    """Lower order statistic at rank ceil(n * epsilon)."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if n * epsilon < min_tail_count:
        raise InsufficientSamplesError(
            f"n*eps = {n * epsilon:g} below the required {min_tail_count} tail samples"
        )
    r = max(1, math.ceil(n * epsilon - 1e-9))
    return float(np.partition(x, r - 1)[r - 1])
