"""Comparison methods: polynomial lower bounds, Gaussianizing approximations,
and quadratic regression of the threshold against M2.

The approximations treat a power transform of beta as Gaussian and invert
it at the normal quantile z = Phi^-1(eps).  With eps tiny, the Gaussian
quantile of the transformed variable can fall below zero; such results are
returned with ``valid=False`` instead of being clamped.

Parameterization: beta = var * X with X ~ chi'^2_K(lam), lam = M2 / var, and
X has mean m = K + lam and variance 2 (K + 2 lam).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln, ndtri

from .chi2 import as_epsilon
from .errors import DomainError

METHODS = ("sankaran_z1", "sankaran_z2", "abdelaty_first", "abdelaty_closer", "zar", "goldstein")
CENTRAL_ONLY = ("zar", "goldstein")


@dataclass(frozen=True)
class ApproximationMethod:
    tag: str

    def __post_init__(self):
        if self.tag not in METHODS:
            raise DomainError(f"unknown approximation {self.tag!r}; choose from {METHODS}")


@dataclass(frozen=True)
class ApproxThreshold:
    value: float
    method: str
    valid: bool


@dataclass(frozen=True)
class QuadraticFit:
    a2: float
    a1: float
    a0: float
    anchored: bool

    @property
    def coefficients(self):
        return (self.a2, self.a1, self.a0)


def poly_lb_central(K, var, target):
    """2 var (eps Gamma(K/2 + 1))^(2/K)."""
    eps = as_epsilon(target)
    return 2.0 * var * math.exp((2.0 / K) * (math.log(eps) + gammaln(0.5 * K + 1.0)))


def poly_lb_noncentral(spec, target):
    """Polynomial bound carried to the non-central case; not a guaranteed bound."""
    eps = as_epsilon(target)
    log_val = (
        math.log(2.0 * spec.var)
        + (2.0 / spec.K) * (math.log(eps) + gammaln(0.5 * spec.K + 1.0))
        + spec.M2 / (spec.K * spec.var)
    )
    return math.exp(log_val)


# -- Gaussianizing approximations --------------------------------------------
#
# Each helper returns (y, inverse, root_ok): y is the Gaussian quantile of the
# transformed variable, inverse maps it back to X, and root_ok marks where y
# lies in the range of the transform.  Vectorized over lam.

def _power_normal(K, lam, z, second_order):
    # (X/m)^h ~ Normal, h chosen to cancel the leading skewness term
    m = K + lam
    h = 1.0 - (2.0 / 3.0) * m * (K + 3.0 * lam) / (K + 2.0 * lam) ** 2
    p = (K + 2.0 * lam) / m**2
    if second_order:
        mm = (h - 1.0) * (1.0 - 3.0 * h)
        mean = 1.0 + h * p * (h - 1.0 - 0.5 * (2.0 - h) * mm * p)
        sd = h * np.sqrt(2.0 * p) * (1.0 + 0.5 * mm * p)
    else:
        mean = 1.0 + h * (h - 1.0) * p
        sd = h * np.sqrt(2.0 * p)
    y = mean + sd * z
    # a fractional power has no real inverse below zero; the closed form is
    # evaluated on |y| and the result flagged
    return y, lambda y: m * np.abs(y) ** (1.0 / h), y >= 0


def _cube_root_moments(K, lam, closer):
    # U = X/m - 1 has cumulants c_r of order m^(1-r); moments of (1 + U)^(1/3)
    # by series expansion in U
    m = K + lam
    c2 = 2.0 * (K + 2.0 * lam) / m**2
    if not closer:
        return 1.0 - c2 / 9.0, np.sqrt(c2 / 9.0), 0.0, 0.0
    c3 = 8.0 * (K + 3.0 * lam) / m**3
    c4 = 48.0 * (K + 4.0 * lam) / m**4
    mean = 1.0 - c2 / 9.0 + 5.0 * c3 / 81.0 - 10.0 * c2**2 / 81.0
    var = c2 / 9.0 - 2.0 * c3 / 27.0 + 4.0 * c2**2 / 27.0
    k3 = c3 / 27.0 - 2.0 * c2**2 / 27.0
    k4 = 88.0 * c2**3 / 729.0 - 8.0 * c2 * c3 / 81.0 + c4 / 81.0
    sd = np.sqrt(var)
    return mean, sd, k3 / sd**3, k4 / sd**4


def _cube_root_normal(K, lam, z, closer):
    m = K + lam
    mean, sd, g1, g2 = _cube_root_moments(K, lam, closer)
    # Cornish-Fisher correction to O(1/m); zero for the first-order form
    w = z + g1 * (z * z - 1.0) / 6.0 + g2 * (z**3 - 3.0 * z) / 24.0 - g1**2 * (2.0 * z**3 - 5.0 * z) / 36.0
    y = mean + sd * w
    # the cube has a real inverse everywhere, so negative y gives negative X
    return y, lambda y: m * y**3, y >= 0


def _transform(tag, K, lam, z):
    if tag == "sankaran_z1":
        return _power_normal(K, lam, z, second_order=False)
    if tag == "sankaran_z2":
        return _power_normal(K, lam, z, second_order=True)
    if tag in ("abdelaty_first", "zar"):
        return _cube_root_normal(K, lam, z, closer=False)
    return _cube_root_normal(K, lam, z, closer=True)


def _evaluate(tag, K, M2, var, target):
    ApproximationMethod(tag)
    z = ndtri(as_epsilon(target))
    M2 = np.asarray(M2, dtype=float)
    var = np.asarray(var, dtype=float)
    lam = M2 / var
    if tag in CENTRAL_ONLY and np.any(lam > 0):
        raise DomainError(f"{tag} is a central chi-squared approximation; M2 must be 0")
    y, inverse, root_ok = _transform(tag, K, lam, z)
    return var * inverse(y), root_ok


def approx_quantile(tag, K, M2, var, target):
    """Vectorized approximate threshold (values only, no validity flags)."""
    return _evaluate(tag, K, M2, var, target)[0]


def approx_threshold(method, spec, target):
    """Approximate beta_T.  Failures are flagged, never clamped.

    sankaran_z1      (beta/m)^h Gaussian, h = 1 - 2 m (K + 3 lam) / (3 (K + 2 lam)^2),
                     first-order mean and variance
    sankaran_z2      same transform with second-order mean and variance
    abdelaty_first   (beta/m)^(1/3) Gaussian, first-order mean and variance
    abdelaty_closer  cube root with second-order moments and a Cornish-Fisher
                     skewness/kurtosis correction
    zar              central Wilson-Hilferty cube-root approximation
    goldstein        central cube root with the second-order terms

    ``valid`` is False when the Gaussian quantile of the transform is
    negative (cube root: a negative threshold; power h: the closed form is
    taken on |y|, usually a gross overestimate) or the value is not positive.
    """
    tag = method.tag if isinstance(method, ApproximationMethod) else ApproximationMethod(method).tag
    value, root_ok = _evaluate(tag, spec.K, spec.M2, spec.var, target)
    value = float(value)
    valid = bool(root_ok) and math.isfinite(value) and value > 0
    return ApproxThreshold(value=value, method=tag, valid=valid)


# -- regression baselines ----------------------------------------------------

def regression_fit(pairs, anchored=False):
    """Least-squares quadratic beta_T ~ a2 M2^2 + a1 M2 + a0."""
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 3:
        raise DomainError("need at least 3 (M2, beta_T) pairs")
    x, y = pairs[:, 0], pairs[:, 1]
    if np.ptp(x) == 0:
        raise DomainError("singular design: all M2 values are equal")
    if anchored:
        at_zero = np.nonzero(x == 0.0)[0]
        if at_zero.size == 0:
            raise DomainError("anchored fit needs the M2 = 0 pair")
        a0 = float(y[at_zero[0]])
        design = np.column_stack([x**2, x])
        (a2, a1), *_ = np.linalg.lstsq(design, y - a0, rcond=None)
        return QuadraticFit(float(a2), float(a1), a0, True)
    design = np.column_stack([x**2, x, np.ones_like(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise DomainError("singular design: need at least 3 distinct M2 values")
    a2, a1, a0 = (float(c) for c in coef)
    return QuadraticFit(a2, a1, a0, False)


def regression_predict(fit, M2):
    M2 = np.asarray(M2, dtype=float)
    out = fit.a2 * M2**2 + fit.a1 * M2 + fit.a0
    return float(out) if out.ndim == 0 else out
