"""Outage probability of load-sharing smart-gateway-diversity satellite networks."""

__version__ = "0.1.0"

from .pbd_core import (
    PbdMoments,
    as_outage_vector,
    moments,
    pmf_fft,
    tail_cfe,
    tail_direct,
    tail_from_pmf,
    tail_recursive,
)
from .pbd_approx import (
    ApproxMethod,
    ApproxResult,
    TvDiagnostics,
    approx_binomial,
    approx_normal,
    approx_poisson,
    approx_refined_normal,
    approximate,
    chernoff_bound,
    tv_distance_and_bounds,
)
from .sgd_model import (
    SgdScenario,
    TailResult,
    improvement_factor,
    sop_equal_capacity,
    sop_general,
    threshold_from_demand,
)

__all__ = [
    "ApproxMethod",
    "ApproxResult",
    "PbdMoments",
    "SgdScenario",
    "TailResult",
    "TvDiagnostics",
    "approx_binomial",
    "approx_normal",
    "approx_poisson",
    "approx_refined_normal",
    "approximate",
    "as_outage_vector",
    "chernoff_bound",
    "improvement_factor",
    "moments",
    "pmf_fft",
    "sop_equal_capacity",
    "sop_general",
    "tail_cfe",
    "tail_direct",
    "tail_from_pmf",
    "tail_recursive",
    "threshold_from_demand",
    "tv_distance_and_bounds",
]
