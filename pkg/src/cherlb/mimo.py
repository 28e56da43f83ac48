"""Single-stream MIMO downlink with aged CSI.

The AP beamforms with an outdated channel H_t while the link sees

    H_{t+tau} = J0(2 pi f_d tau) H_t + Omega,   Omega ~ CN(0, 1 - J0^2),

so for a fixed beamformer w the gain beta = ||H_{t+tau} w||^2 is a
non-central chi-squared with K = 2N real components.  The bound on beta
sets the transmit energy for a target outage.

Trials are processed in fixed-size chunks; chunk c draws its channels from
substream (seed, STREAM_CHANNEL, c) and innovations from
(seed, STREAM_INNOVATION, c), so results do not depend on the worker count.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import j0
from scipy.stats import kstest

from . import _streams
from .baselines import approx_quantile
from .chernoff import SolverConfig, solve_noncentral, solve_noncentral_batch
from .chi2 import NoncentralChiSquareSpec, as_epsilon, noncentral_cdf_array
from .errors import DomainError, InsufficientSamplesError

SPEED_OF_LIGHT = 2.99792458e8
TRIAL_CHUNK = 4096
RHO_RESOLUTION = 0.01
MIN_TRIALS = 10_000
Z2_SWITCH_RHO = 120.0

bessel_j0 = j0


class DeterministicGainError(DomainError):
    """No CSI aging: the gain is deterministic and has no chi-squared law."""


@dataclass(frozen=True)
class MarkovChannelParams:
    carrier_hz: float = 3.5e9
    velocity_mps: float = 20.0
    lag_s: float = 0.5e-3

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise DomainError("carrier_hz must be positive")
        if not self.velocity_mps >= 0:
            raise DomainError("velocity_mps must be nonnegative")
        if not self.lag_s >= 0:
            raise DomainError("lag_s must be nonnegative")

    @property
    def doppler_hz(self):
        return self.velocity_mps * self.carrier_hz / SPEED_OF_LIGHT

    @property
    def corr(self):
        return doppler_correlation(self)

    @property
    def innov_var(self):
        return 1.0 - self.corr**2


@dataclass(frozen=True)
class MimoConfig:
    M: int = 16
    N: int = 2
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("N must be a positive integer")
        if int(self.M) != self.M or self.M < self.N:
            raise DomainError("need M >= N >= 1")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")

    @property
    def K(self):
        return 2 * self.N


@dataclass(frozen=True)
class MonteCarloStat:
    name: str
    value: float
    stderr: float
    trials: int


def doppler_correlation(params):
    """J0(2 pi f_d tau)."""
    return float(bessel_j0(2.0 * math.pi * params.doppler_hz * params.lag_s))


# -- channel draws ---------------------------------------------------------------

def _complex_normal(rng, shape):
    z = rng.standard_normal(shape + (2,))
    return z.view(np.complex128)[..., 0] * math.sqrt(0.5)


def _channel_chunk(cfg, seed, c, n):
    return _complex_normal(_streams.chunk_rng(seed, _streams.STREAM_CHANNEL, c), (n, cfg.N, cfg.M))


def _innovation_chunk(cfg, seed, c, n):
    return _complex_normal(_streams.chunk_rng(seed, _streams.STREAM_INNOVATION, c), (n, cfg.N, cfg.M))


def sample_channel(cfg, seed=None):
    """One N x M i.i.d. CN(0, 1) channel; equals trial 0 of the experiments."""
    seed = cfg.seed if seed is None else seed
    return _channel_chunk(cfg, seed, 0, 1)[0]


def evolve_channel(H_t, params, seed, n=None):
    """H_{t+tau} for a fixed H_t.  With ``n`` given, returns n independent evolutions."""
    H_t = np.asarray(H_t, dtype=complex)
    if H_t.ndim != 2:
        raise DomainError("H_t must be an N x M matrix")
    rho = params.corr
    sd = math.sqrt(max(params.innov_var, 0.0))
    rng = _streams.chunk_rng(seed, _streams.STREAM_INNOVATION, 0)
    if n is None:
        return rho * H_t + sd * _complex_normal(rng, H_t.shape)
    return rho * H_t + sd * _complex_normal(rng, (int(n),) + H_t.shape)


# -- beamforming and the gain law ------------------------------------------------

def _mf_batch(H):
    v = np.conj(np.sum(H, axis=-2))  # H^H 1_N
    scale = np.linalg.norm(np.einsum("...nm,...m->...n", H, v), axis=-1)
    return v / scale[..., None]


def mf_beamformer(H_t):
    """w = H^H 1_N / ||H H^H 1_N||, so that ||H w||^2 = 1."""
    H_t = np.asarray(H_t, dtype=complex)
    if H_t.ndim != 2:
        raise DomainError("H_t must be an N x M matrix")
    v = np.conj(H_t.sum(axis=0))
    norm = np.linalg.norm(H_t @ v)
    if norm == 0.0:
        raise DomainError("degenerate channel: H H^H 1 = 0")
    return v / norm


def gain_params(H_t, w, params):
    """Law of ||H_{t+tau} w||^2 given H_t: K = 2N, M2 = J0^2 sum_n |h_n^T w|^2."""
    H_t = np.asarray(H_t, dtype=complex)
    w = np.asarray(w, dtype=complex)
    corr = params.corr
    innov = params.innov_var
    if innov <= 0.0:
        raise DeterministicGainError("zero innovation variance: the gain is deterministic")
    M2 = corr**2 * float(np.sum(np.abs(H_t @ w) ** 2))
    var = innov * float(np.vdot(w, w).real) / 2.0
    return NoncentralChiSquareSpec(2 * H_t.shape[0], M2, var)


def predict_gain(H_t, params, target, cfg=None):
    """Chernoff bound on the gain the MF beam will see after tau."""
    return solve_noncentral(gain_params(H_t, mf_beamformer(H_t), params), target, cfg)


def required_energy(bound, snr_target, noise_var):
    if not bound > 0 or not snr_target > 0 or not noise_var > 0:
        raise DomainError("bound, snr_target and noise_var must be positive")
    return snr_target * noise_var / bound


# -- vectorized per-trial quantities ---------------------------------------------

def _chunk_specs(H, params):
    """(M2, var, w) per trial for a batch of channels."""
    w = _mf_batch(H)
    wnorm2 = np.sum(np.abs(w) ** 2, axis=-1)
    M2 = np.full(wnorm2.shape, params.corr**2)  # sum_n |h_n^T w|^2 = 1 by construction
    return M2, params.innov_var * wnorm2 / 2.0, w


def quantized_bounds(K, M2, var, target, solver_cfg=None):
    """Per-trial bounds via the scaling law on a floored rho grid.

    bound(M2, var) = var * bound(rho, 1); rho is floored to RHO_RESOLUTION, and
    since the unit-variance bound grows with rho, flooring keeps it conservative.
    """
    rho = M2 / var
    q = np.floor(rho / RHO_RESOLUTION).astype(np.int64)
    uq, inv = np.unique(q, return_inverse=True)
    rho_q = uq * RHO_RESOLUTION
    unit = solve_noncentral_batch(K, rho_q, np.ones_like(rho_q), target, solver_cfg)
    return var * unit[inv]


def _check_params(params):
    if params.innov_var <= 0.0:
        raise DeterministicGainError("zero innovation variance: the gain is deterministic")


def _map_trials(cfg, fn, workers):
    def chunk(c, start, stop):
        return fn(c, stop - start)

    return _streams.map_chunks(chunk, cfg.trials, TRIAL_CHUNK, workers)


def _mean_stat(name, parts, trials):
    # parts: per-chunk (sum, sum of squares); ordered fsum keeps it reproducible
    s = math.fsum(p[0] for p in parts)
    ss = math.fsum(p[1] for p in parts)
    mean = s / trials
    var = max(ss / trials - mean * mean, 0.0)
    return MonteCarloStat(name, mean, math.sqrt(var / trials), trials)


def _require(cfg, minimum=MIN_TRIALS):
    if cfg.trials < minimum:
        raise InsufficientSamplesError(f"need at least {minimum} trials, got {cfg.trials}")


# -- experiments -------------------------------------------------------------------

def experiment_rho_probability(cfg, params=None, threshold=120.0, workers=None):
    """Monte Carlo P(rho < threshold) over H_t draws."""
    params = params or MarkovChannelParams()
    _require(cfg)
    _check_params(params)

    def fn(c, n):
        M2, var, _ = _chunk_specs(_channel_chunk(cfg, cfg.seed, c, n), params)
        return int(np.count_nonzero(M2 / var < threshold))

    hits = sum(_map_trials(cfg, fn, workers))
    p = hits / cfg.trials
    return MonteCarloStat("rho_prob", p, math.sqrt(p * (1.0 - p) / cfg.trials), cfg.trials)


def experiment_bounds(cfg, params=None, target=1e-6, solver_cfg=None, workers=None):
    """Mean bound, mean lambda and mean rho over H_t draws."""
    params = params or MarkovChannelParams()
    _require(cfg, 1)
    _check_params(params)

    def fn(c, n):
        M2, var, _ = _chunk_specs(_channel_chunk(cfg, cfg.seed, c, n), params)
        b = quantized_bounds(cfg.K, M2, var, target, solver_cfg)
        lam = b / (M2 + cfg.K * var)
        rho = M2 / var
        return [(math.fsum(v), math.fsum(v * v)) for v in (b, lam, rho)]

    parts = _map_trials(cfg, fn, workers)
    return [
        _mean_stat(name, [p[i] for p in parts], cfg.trials)
        for i, name in enumerate(("mean_bound", "mean_lambda", "mean_rho"))
    ]


def experiment_power(cfg, params=None, target=1e-6, solver_cfg=None, workers=None):
    """E(1/bound), E(lambda/bound) and E(1/threshold) for the combined rule.

    The combined rule uses the sankaran_z2 approximation once rho >= 120 and
    the Chernoff bound below that.
    """
    params = params or MarkovChannelParams()
    _require(cfg)
    _check_params(params)

    def fn(c, n):
        M2, var, _ = _chunk_specs(_channel_chunk(cfg, cfg.seed, c, n), params)
        b = quantized_bounds(cfg.K, M2, var, target, solver_cfg)
        inv_b = 1.0 / b
        lam_over_b = 1.0 / (M2 + cfg.K * var)
        rho = M2 / var
        combined = b.copy()
        hi = rho >= Z2_SWITCH_RHO
        if np.any(hi):
            combined[hi] = approx_quantile("sankaran_z2", cfg.K, M2[hi], var[hi], target)
        inv_c = 1.0 / combined
        return [(math.fsum(v), math.fsum(v * v)) for v in (inv_b, lam_over_b, inv_c)]

    parts = _map_trials(cfg, fn, workers)
    return [
        _mean_stat(name, [p[i] for p in parts], cfg.trials)
        for i, name in enumerate(("mean_inv_bound", "mean_lambda_over_bound", "mean_inv_combined"))
    ]


def experiment_reliability(cfg, params=None, target=1e-3, solver_cfg=None, workers=None):
    """Fraction of (H_t, Omega) pairs whose realized gain falls below the bound."""
    params = params or MarkovChannelParams()
    _require(cfg)
    _check_params(params)
    corr = params.corr
    sd = math.sqrt(params.innov_var)

    def fn(c, n):
        H = _channel_chunk(cfg, cfg.seed, c, n)
        M2, var, w = _chunk_specs(H, params)
        b = quantized_bounds(cfg.K, M2, var, target, solver_cfg)
        H_next = corr * H + sd * _innovation_chunk(cfg, cfg.seed, c, n)
        beta = np.sum(np.abs(np.einsum("tnm,tm->tn", H_next, w)) ** 2, axis=-1)
        return int(np.count_nonzero(beta < b))

    hits = sum(_map_trials(cfg, fn, workers))
    p = hits / cfg.trials
    return MonteCarloStat("outage", p, math.sqrt(max(p * (1.0 - p), 0.0) / cfg.trials), cfg.trials)


def realized_gains(H_t, params, n, seed, workers=None):
    """n draws of ||H_{t+tau} w||^2 for a fixed H_t and its MF beam."""
    H_t = np.asarray(H_t, dtype=complex)
    w = mf_beamformer(H_t)
    corr = params.corr
    sd = math.sqrt(params.innov_var)
    base = corr * (H_t @ w)
    N, M = H_t.shape

    def chunk(c, start, stop):
        rng = _streams.chunk_rng(seed, _streams.STREAM_INNOVATION, c)
        omega = _complex_normal(rng, (stop - start, N, M))
        return np.sum(np.abs(base + sd * (omega @ w)) ** 2, axis=-1)

    return np.concatenate(_streams.map_chunks(chunk, int(n), TRIAL_CHUNK, workers))


def ks_gain_law(H_t, params, n, seed, workers=None):
    """Kolmogorov-Smirnov test of realized gains against the mapped law."""
    spec = gain_params(H_t, mf_beamformer(H_t), params)
    gains = realized_gains(H_t, params, n, seed, workers)
    return kstest(gains, lambda x: noncentral_cdf_array(spec, x))
