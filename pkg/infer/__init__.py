"""
超参数推断模块
经验贝叶斯、自适应 MH、含噪数据 Gibbs 采样与拟合流程
"""
from .diagnostics import autocorrelation, effective_sample_size, summarize_chain
from .mh import (
    AdaptiveMetropolis,
    MHResult,
    RunningCovariance,
    adaptive_mh,
    default_init,
    log_acceptance_ratio,
    log_posterior,
)
from .empirical_bayes import empirical_bayes
from .fitting import (
    CovarianceSummary,
    FitResult,
    column_posteriors,
    credible_intervals,
    draw_factor,
    fit_bayes,
    fit_map,
    interval_coverage,
    map_factor,
    posterior_covariance_summary,
    posterior_factor_draws,
)
from .gibbs import GibbsResult, draw_latent_fields, gibbs_noisy

__all__ = [
    "autocorrelation",
    "effective_sample_size",
    "summarize_chain",
    "AdaptiveMetropolis",
    "MHResult",
    "RunningCovariance",
    "adaptive_mh",
    "default_init",
    "log_acceptance_ratio",
    "log_posterior",
    "empirical_bayes",
    "CovarianceSummary",
    "FitResult",
    "column_posteriors",
    "credible_intervals",
    "draw_factor",
    "fit_bayes",
    "fit_map",
    "interval_coverage",
    "map_factor",
    "posterior_covariance_summary",
    "posterior_factor_draws",
    "GibbsResult",
    "draw_latent_fields",
    "gibbs_noisy",
]
