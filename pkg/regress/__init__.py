"""
逐列回归与积分似然模块
"""
from .posterior import (
    ColumnRegression,
    ColumnPosterior,
    extract_regression,
    nig_posterior,
    beta_tilde_small_n,
    column_map,
    column_sample,
    column_rng,
)
from .likelihood import column_log_terms, integrated_log_likelihood

__all__ = [
    "ColumnRegression",
    "ColumnPosterior",
    "extract_regression",
    "nig_posterior",
    "beta_tilde_small_n",
    "column_map",
    "column_sample",
    "column_rng",
    "column_log_terms",
    "integrated_log_likelihood",
]
