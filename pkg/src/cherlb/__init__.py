"""Chernoff lower bounds on the outage threshold of chi-squared channel gains."""

from .chi2 import (
    GeneralizedChiSquareSpec,
    NoncentralChiSquareSpec,
    ReliabilityTarget,
    empirical_quantile,
    marcum_q,
    mgf_reciprocal,
    noncentral_cdf,
    noncentral_sf,
    numeric_quantile,
    sample,
)
from .chernoff import (
    BoundReport,
    SolverConfig,
    objective_general,
    objective_noncentral,
    optimal_nu,
    solve_central,
    solve_general,
    solve_noncentral,
    verify,
)
from .errors import DomainError, InsufficientSamplesError, IterationLimitError

__version__ = "0.1.0"
