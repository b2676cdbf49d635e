"""
基准估计方法模块
"""
from .estimators import (
    ESTIMATOR_TAGS,
    EstimatorOutput,
    ExponentialFit,
    exponential_fit,
    mle_regression,
    run_estimator,
    sample_cov,
    scovt,
    standardize,
)

__all__ = [
    "ESTIMATOR_TAGS",
    "EstimatorOutput",
    "ExponentialFit",
    "exponential_fit",
    "mle_regression",
    "run_estimator",
    "sample_cov",
    "scovt",
    "standardize",
]
