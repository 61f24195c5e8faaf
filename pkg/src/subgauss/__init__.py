"""Optimal sub-Gaussian variance proxies of finite discrete distributions."""
from .characterizer import (
    CandidatePoint,
    ProxyResult,
    SolverConfig,
    SolverError,
    classify_candidate,
    find_h_roots,
    optimal_proxy_general,
    search_window,
)
from .closed_forms import (
    ThreeMassParams,
    asymmetric_three_mass_proxy,
    bernoulli_proxy,
    binomial_proxy,
    closed_form_for,
    discrete_uniform_proxy,
    symmetric_lambda0,
    symmetric_sigma1,
    symmetric_sigma2,
    symmetric_three_mass_proxy,
)
from .distribution import (
    CgfDerivatives,
    DiscreteDistribution,
    affine_transform,
    central_moment,
    cgf_at,
    cgf_grid,
    g_eval,
    h_eval,
    h_grid,
    log_mgf,
    mean,
    new_discrete,
    variance,
)
from .oracle import GridConfig, VerificationReport, bisect_optimal_proxy, export_curve, is_variance_proxy

__version__ = "0.1.0"
