"""Exact and simulated return probabilities and local times of the Half-Plane Half-Comb walk."""

__version__ = "0.1.0"

from .exact import (  # noqa: E402
    SizeBoundError,
    binomial,
    central_return_1d,
    negbin_cdf,
    negbin_pmf,
    p2n2r_closed,
    p2n2r_sum,
    p2n_odd,
    q_ratio,
)
from .profiles import LatticeSite, PJProfile, step_kernel  # noqa: E402
from .returnprob import (  # noqa: E402
    asymptotic_return_prob,
    exact_return_prob,
    log_return_prob,
    scaled_convergence_table,
)
from .oracle import dp_return_prob, dp_site_distribution, enumerate_1d_joint  # noqa: E402

__all__ = [
    "SizeBoundError",
    "binomial",
    "central_return_1d",
    "negbin_cdf",
    "negbin_pmf",
    "p2n2r_closed",
    "p2n2r_sum",
    "p2n_odd",
    "q_ratio",
    "LatticeSite",
    "PJProfile",
    "step_kernel",
    "asymptotic_return_prob",
    "exact_return_prob",
    "log_return_prob",
    "scaled_convergence_table",
    "dp_return_prob",
    "dp_site_distribution",
    "enumerate_1d_joint",
]
