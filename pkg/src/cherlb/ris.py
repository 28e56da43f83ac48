"""RIS-assisted link with perfectly aligned reflections.

The end-to-end gain is beta = (sum_n |h_n| |g_n|)^2 over N_R reflectors with
unit-power Rician links.  For large N_R the sum is close to Gaussian, so
beta is mapped to a K = 1 non-central chi-squared:

    M2 = N_R^2 E(|h g|)^2,   var = N_R Var(|h g|).

Exact (non-CLT) samples are drawn to measure how conservative the bound is.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import ive
from scipy.stats import kstest

from . import _streams
from .chernoff import solve_noncentral
from .chi2 import NoncentralChiSquareSpec, as_epsilon, noncentral_cdf_array
from .errors import DomainError, InsufficientSamplesError

MIN_TAIL_COUNT = 100
# normals per chunk stays near 4 * 2^18 regardless of N_R
CHUNK_TERMS = 1 << 18


@dataclass(frozen=True)
class RisConfig:
    N_R: int = 64
    kappa_h: float = 3.0
    kappa_g: float = 3.0
    trials: int = 100_000_000
    seed: int = 0

    def __post_init__(self):
        if int(self.N_R) != self.N_R or self.N_R < 1:
            raise DomainError("N_R must be a positive integer")
        if not self.kappa_h >= 0 or not self.kappa_g >= 0:
            raise DomainError("K-factors must be nonnegative")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")

    @property
    def chunk_size(self):
        return max(16, CHUNK_TERMS // self.N_R)


@dataclass(frozen=True)
class RisResult:
    N_R: int
    kappa: float
    epsilon: float
    bound: float
    empirical_threshold: float
    ratio: float
    achieved_outage: float
    normalized_gain: float
    trials: int


def laguerre_half(kappa):
    """L_{1/2}(-kappa) = e^{-kappa/2} [(1 + kappa) I0(kappa/2) + kappa I1(kappa/2)]."""
    if not kappa >= 0:
        raise DomainError("kappa must be nonnegative")
    # ive already carries the exp(-kappa/2) factor, so large kappa is safe
    return float((1.0 + kappa) * ive(0, 0.5 * kappa) + kappa * ive(1, 0.5 * kappa))


def rician_mean(kappa):
    """E|h| for a unit-power Rician magnitude."""
    return 0.5 * math.sqrt(math.pi / (1.0 + kappa)) * laguerre_half(kappa)


def product_moments(kappa_h, kappa_g):
    """Mean and variance of |h||g|; the product has unit second moment."""
    mean = rician_mean(kappa_h) * rician_mean(kappa_g)
    return mean, 1.0 - mean * mean


def clt_spec(cfg):
    mean, var = product_moments(cfg.kappa_h, cfg.kappa_g)
    return NoncentralChiSquareSpec(1, cfg.N_R**2 * mean**2, cfg.N_R * var)


def _rician_from_normals(kappa, re, im):
    nu = math.sqrt(kappa / (1.0 + kappa))
    sd = math.sqrt(0.5 / (1.0 + kappa))
    return np.hypot(nu + sd * re, sd * im)


def _rician_magnitude(rng, kappa, shape):
    z = rng.standard_normal((2,) + shape)
    return _rician_from_normals(kappa, z[0], z[1])


def _gain_chunk(cfg, seed, c, n):
    rng = _streams.chunk_rng(seed, _streams.STREAM_RIS, c)
    # row-major draws keep row i a prefix-stable function of (seed, chunk, i)
    z = rng.standard_normal((n, 4, cfg.N_R))
    h = _rician_from_normals(cfg.kappa_h, z[:, 0], z[:, 1])
    g = _rician_from_normals(cfg.kappa_g, z[:, 2], z[:, 3])
    return np.sum(h * g, axis=1) ** 2


def sample_gain(cfg, n, seed=None, workers=None):
    """n exact draws of (sum |h_n g_n|)^2; draw i depends only on (seed, i)."""
    seed = cfg.seed if seed is None else seed
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    return np.concatenate(
        _streams.map_chunks(lambda c, a, b: _gain_chunk(cfg, seed, c, b - a), n, cfg.chunk_size, workers)
    )


def ris_experiment(cfg, target, solver_cfg=None, workers=None):
    """Bound versus the empirical lower quantile of exact samples.

    The empirical threshold is the ceil(trials * eps)-th smallest draw, kept
    by a streaming selection so trials can exceed memory.
    """
    eps = as_epsilon(target)
    if cfg.trials * eps < MIN_TAIL_COUNT:
        raise InsufficientSamplesError(
            f"trials * eps = {cfg.trials * eps:g}; need at least {MIN_TAIL_COUNT} tail samples"
        )
    bound = solve_noncentral(clt_spec(cfg), eps, solver_cfg).bound
    rank = max(1, math.ceil(cfg.trials * eps - 1e-9))

    def fn(c, start, stop):
        x = _gain_chunk(cfg, cfg.seed, c, stop - start)
        below = int(np.count_nonzero(x < bound))
        if x.size > rank:
            x = np.partition(x, rank - 1)[:rank]
        return below, x

    def fold(state, res):
        tail, count = state
        tail.update(res[1])
        return tail, count + res[0]

    tail, count = _streams.fold_chunks(
        fn, cfg.trials, cfg.chunk_size, fold, (_streams.LowerTail(rank), 0), workers
    )
    threshold = tail.order_statistic()
    kappa = cfg.kappa_h if cfg.kappa_h == cfg.kappa_g else float("nan")
    return RisResult(
        N_R=cfg.N_R,
        kappa=kappa,
        epsilon=eps,
        bound=bound,
        empirical_threshold=threshold,
        ratio=bound / threshold,
        achieved_outage=count / cfg.trials,
        normalized_gain=bound / cfg.N_R**2,
        trials=cfg.trials,
    )


def ks_distance(cfg, n, seed=None, workers=None):
    """KS distance between exact gains and the CLT law."""
    spec = clt_spec(cfg)
    return kstest(sample_gain(cfg, n, seed, workers), lambda x: noncentral_cdf_array(spec, x)).statistic
