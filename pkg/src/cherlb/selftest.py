"""Fast invariant checks run by ``cherlb selftest``.

Everything here finishes in a few seconds and uses at most 1e5 samples.
Output depends only on the seed.
"""

import math

import numpy as np

from . import mimo, ris
from .chernoff import SolverConfig, solve_central, solve_general, solve_noncentral
from .chi2 import GeneralizedChiSquareSpec, NoncentralChiSquareSpec, noncentral_cdf, numeric_quantile, sample
from .metrics import check_scaling, closeness, epsilon_from_lambda

# J0(2 pi * 233.494866... Hz * 0.5 ms) for the default channel, from the
# ascending series below (independent of the library Bessel routine)
J0_DEFAULT = 0.8699346652590143


def _j0_series(x, terms=40):
    q = -0.25 * x * x
    term, total = 1.0, 1.0
    for k in range(1, terms):
        term *= q / (k * k)
        total += term
    return total


def check_j0():
    params = mimo.MarkovChannelParams()
    arg = 2.0 * math.pi * params.doppler_hz * params.lag_s
    got = mimo.doppler_correlation(params)
    ref = _j0_series(arg)
    ok = abs(got - ref) < 1e-12 and abs(got - J0_DEFAULT) < 1e-12
    return ok, f"J0={got:.12f} series={ref:.12f}"


def check_j0_root():
    got = mimo.bessel_j0(2.404825557695773)
    return abs(got) < 1e-6, f"J0(first zero)={got:.3g}"


def check_central_cdf():
    # K = 2, unit variance: F(x) = 1 - exp(-x/2)
    spec = NoncentralChiSquareSpec(2, 0.0, 1.0)
    err = max(abs(noncentral_cdf(spec, x) - (-math.expm1(-x / 2.0))) for x in (0.01, 1.0, 7.5))
    return err < 1e-14, f"max error {err:.2g}"


def check_conservative():
    worst = 0.0
    for K in (1, 4, 16):
        for rho in (0.0, 10.0, 300.0):
            for eps in (1e-3, 1e-9):
                b = solve_noncentral(NoncentralChiSquareSpec(K, rho, 1.0), eps).bound
                worst = max(worst, noncentral_cdf(NoncentralChiSquareSpec(K, rho, 1.0), b) / eps)
    return worst <= 1.0, f"max F(bound)/eps = {worst:.3g}"


def check_central_agreement():
    cfg = SolverConfig()
    gaps = []
    for K in (2, 8, 30):
        a = solve_central(K, 1.0, 1e-6, cfg).bound
        b = solve_noncentral(NoncentralChiSquareSpec(K, 0.0, 1.0), 1e-6, cfg).bound
        gaps.append(abs(a - b) / K)
    return max(gaps) <= cfg.delta_beta, f"max gap/mean {max(gaps):.2g}"


def check_general_matches():
    spec = NoncentralChiSquareSpec(4, 25.0, 1.0)
    a = solve_noncentral(spec, 1e-6).bound
    b = solve_general(spec.as_general(), 1e-6).bound
    return abs(a - b) <= 2e-4 * spec.mean(), f"{a:.6g} vs {b:.6g}"


def check_quantile_above_bound():
    spec = NoncentralChiSquareSpec(4, 100.0, 1.0)
    q = numeric_quantile(spec, 1e-6)
    b = solve_noncentral(spec, 1e-6).bound
    return b < q, f"bound {b:.5g} < quantile {q:.5g}"


def check_inverse():
    spec = NoncentralChiSquareSpec(6, 40.0, 1.0)
    cfg = SolverConfig(delta_beta=1e-10)
    b = solve_noncentral(spec, 1e-5, cfg).bound
    eps = epsilon_from_lambda(closeness(spec, b).lam, spec.rho, spec.K)
    return abs(eps / 1e-5 - 1.0) < 1e-6, f"round trip {eps:.8g}"


def check_scaling_law():
    err = max(check_scaling(NoncentralChiSquareSpec(4, 10.0, 1.0), eta, 1e-6) for eta in (0.1, 3.0, 10.0))
    return err <= 2e-4, f"max relative error {err:.2g}"


def check_ris_moments():
    mean, var = ris.product_moments(0.0, 0.0)
    ok = abs(mean - math.pi / 4.0) < 1e-14 and abs(mean * mean + var - 1.0) < 1e-14
    ok = ok and abs(ris.laguerre_half(0.0) - 1.0) < 1e-15
    return ok, f"mean={mean:.12f}"


def check_beamformer(seed):
    H = mimo.sample_channel(mimo.MimoConfig(16, 2, 1, seed))
    w = mimo.mf_beamformer(H)
    gain = float(np.sum(np.abs(H @ w) ** 2))
    return abs(gain - 1.0) < 1e-12, f"||H w||^2 - 1 = {gain - 1.0:.2g}"


def check_determinism(seed):
    spec = GeneralizedChiSquareSpec(((1.0, 1.0), (0.5, 2.0)))
    a = sample(spec, 100_000, seed, workers=1)
    b = sample(spec, 100_000, seed, workers=3)
    return bool(np.array_equal(a, b)), ""


def run(seed=0):
    checks = [
        ("doppler correlation", check_j0),
        ("bessel root", check_j0_root),
        ("central cdf", check_central_cdf),
        ("conservative bound", check_conservative),
        ("central solver agreement", check_central_agreement),
        ("generalized solver agreement", check_general_matches),
        ("bound below quantile", check_quantile_above_bound),
        ("lambda inverse", check_inverse),
        ("scaling law", check_scaling_law),
        ("ris moments", check_ris_moments),
        ("beamformer normalization", lambda: check_beamformer(seed)),
        ("sampling determinism", lambda: check_determinism(seed)),
    ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed invariant
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
