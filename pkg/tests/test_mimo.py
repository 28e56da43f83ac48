import math

import numpy as np
import pytest

from cherlb import mimo
from cherlb.chernoff import solve_noncentral
from cherlb.chi2 import NoncentralChiSquareSpec, noncentral_cdf
from cherlb.errors import DomainError, InsufficientSamplesError

PARAMS = mimo.MarkovChannelParams()


def test_params_derived_quantities():
    assert PARAMS.doppler_hz == pytest.approx(20 * 3.5e9 / 2.99792458e8, rel=1e-15)
    assert PARAMS.corr == pytest.approx(0.869934665259, abs=1e-12)
    assert PARAMS.corr**2 + PARAMS.innov_var == 1.0
    with pytest.raises(DomainError):
        mimo.MarkovChannelParams(carrier_hz=0.0)
    with pytest.raises(DomainError):
        mimo.MarkovChannelParams(velocity_mps=-1.0)


def test_j0_reference_points():
    assert mimo.doppler_correlation(mimo.MarkovChannelParams(lag_s=0.0)) == 1.0
    assert abs(mimo.bessel_j0(2.404825557695773)) < 1e-6


def test_config_validation():
    with pytest.raises(DomainError):
        mimo.MimoConfig(M=2, N=4)
    with pytest.raises(DomainError):
        mimo.MimoConfig(M=4, N=0)
    assert mimo.MimoConfig(16, 2).K == 4


def test_channel_statistics():
    cfg = mimo.MimoConfig(M=1000, N=2, trials=500, seed=1)
    H = np.concatenate([mimo._channel_chunk(cfg, 1, c, 1) for c in range(500)]).ravel()
    assert abs(np.mean(np.abs(H) ** 2) - 1) < 0.01
    assert abs(H.mean()) < 0.005
    rows = H.reshape(-1, 2, 1000)
    corr = np.mean(rows[:, 0, :] * np.conj(rows[:, 1, :]))
    assert abs(corr) < 0.01


def test_sample_channel_deterministic():
    cfg = mimo.MimoConfig(16, 2, seed=5)
    assert np.array_equal(mimo.sample_channel(cfg), mimo.sample_channel(cfg))
    assert mimo.sample_channel(cfg).shape == (2, 16)


def test_evolve_channel():
    H = mimo.sample_channel(mimo.MimoConfig(64, 4, seed=2))
    frozen = mimo.MarkovChannelParams(lag_s=0.0)
    assert np.array_equal(mimo.evolve_channel(H, frozen, 3), H)
    # correlation and stationarity over many evolutions of one channel entry set
    H0 = mimo.sample_channel(mimo.MimoConfig(1000, 1, seed=4))
    nxt = mimo.evolve_channel(H0, PARAMS, 9, n=1000)
    ref = np.broadcast_to(H0, nxt.shape)
    c = np.mean(nxt * np.conj(ref)).real / np.mean(np.abs(ref) ** 2)
    assert c == pytest.approx(PARAMS.corr, abs=0.01)
    assert np.var(nxt - PARAMS.corr * ref) == pytest.approx(PARAMS.innov_var, abs=0.01)
    with pytest.raises(DomainError):
        mimo.evolve_channel(np.ones(4), PARAMS, 0)


def test_mf_beamformer_unit_gain():
    for seed in range(5):
        H = mimo.sample_channel(mimo.MimoConfig(32, 3, seed=seed))
        w = mimo.mf_beamformer(H)
        assert np.sum(np.abs(H @ w) ** 2) == pytest.approx(1.0, abs=1e-12)
    h = mimo.sample_channel(mimo.MimoConfig(8, 1, seed=1))
    w = mimo.mf_beamformer(h)
    assert abs(h[0] @ w) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(w / np.linalg.norm(w), np.conj(h[0]) / np.linalg.norm(h[0]))
    with pytest.raises(DomainError):
        mimo.mf_beamformer(np.zeros((2, 4)))


def test_beam_norm_shrinks_like_inverse_m():
    means = []
    for M in (16, 32, 64):
        vals = [np.vdot(w, w).real for w in (mimo.mf_beamformer(mimo.sample_channel(mimo.MimoConfig(M, 2, seed=s))) for s in range(300))]
        means.append(np.mean(vals) * M)
    # M * ||w||^2 settles as M grows
    assert abs(means[2] - means[1]) < abs(means[1] - means[0]) + 0.05


def test_gain_params():
    H = mimo.sample_channel(mimo.MimoConfig(16, 2, seed=3))
    w = mimo.mf_beamformer(H)
    spec = mimo.gain_params(H, w, PARAMS)
    assert spec.K == 4
    assert spec.M2 == pytest.approx(PARAMS.corr**2, rel=1e-12)
    assert spec.var == pytest.approx(PARAMS.innov_var * np.vdot(w, w).real / 2, rel=1e-14)
    with pytest.raises(mimo.DeterministicGainError):
        mimo.gain_params(H, w, mimo.MarkovChannelParams(lag_s=0.0))


def test_predict_gain_and_energy():
    H = mimo.sample_channel(mimo.MimoConfig(16, 2, seed=3))
    r = mimo.predict_gain(H, PARAMS, 1e-6)
    assert r.bound == solve_noncentral(mimo.gain_params(H, mimo.mf_beamformer(H), PARAMS), 1e-6).bound
    assert mimo.required_energy(r.bound, 10.0, 0.1) == pytest.approx(1.0 / r.bound)
    with pytest.raises(DomainError):
        mimo.required_energy(0.0, 1.0, 1.0)


def test_quantized_bounds_are_conservative():
    K = 4
    M2 = np.full(50, 0.75)
    var = np.linspace(0.002, 0.02, 50)
    q = mimo.quantized_bounds(K, M2, var, 1e-6)
    for b, m, v in zip(q, M2, var):
        exact = solve_noncentral(NoncentralChiSquareSpec(K, m, v), 1e-6).bound
        assert b <= exact * (1 + 2e-4)
        assert b == pytest.approx(exact, rel=1e-3)


def test_rho_probability_small():
    stat = mimo.experiment_rho_probability(mimo.MimoConfig(16, 2, 20_000, 1), PARAMS)
    assert stat.value == pytest.approx(0.727, abs=0.02)
    with pytest.raises(InsufficientSamplesError):
        mimo.experiment_rho_probability(mimo.MimoConfig(16, 2, 10, 1), PARAMS)


def test_experiments_deterministic_across_workers():
    cfg = mimo.MimoConfig(16, 2, 20_000, 4)
    a = mimo.experiment_power(cfg, PARAMS, workers=1)
    b = mimo.experiment_power(cfg, PARAMS, workers=3)
    assert a == b


def test_single_shot_outage_small():
    stat = mimo.experiment_reliability(mimo.MimoConfig(16, 2, 200_000, 2), PARAMS, 1e-2)
    assert stat.value <= 1e-2 + 4 * math.sqrt(1e-2 / 200_000)


def test_realized_gain_law_small():
    H = mimo.sample_channel(mimo.MimoConfig(16, 2, seed=8))
    res = mimo.ks_gain_law(H, PARAMS, 50_000, 1)
    assert res.pvalue > 0.01


def test_hardening_monotone():
    means = []
    for M in (16, 32, 64, 128):
        means.append(mimo.experiment_bounds(mimo.MimoConfig(M, 2, 4000, 1), PARAMS)[0].value)
    assert all(a < b for a, b in zip(means, means[1:]))
    assert means[-1] < PARAMS.corr**2


def test_realized_gain_cdf_pointwise():
    H = mimo.sample_channel(mimo.MimoConfig(16, 2, seed=6))
    spec = mimo.gain_params(H, mimo.mf_beamformer(H), PARAMS)
    gains = np.sort(mimo.realized_gains(H, PARAMS, 10**7, 12))
    for p in np.linspace(0.01, 0.99, 10):
        x = gains[int(p * gains.size)]
        f = noncentral_cdf(spec, x)
        emp = np.searchsorted(gains, x, side="right") / gains.size
        assert abs(emp - f) <= 4 * math.sqrt(f * (1 - f) / gains.size)
