"""
因子组装、协方差还原与评估指标模块
"""
from .factor import (
    SparseICF,
    assemble,
    factor_from_triplets,
    off_diagonal_triplets,
    dense_covariance,
    precision_matrix,
    field_from_z,
    sample_field,
    sample_fields,
    linear_comb_cov,
)
from .metrics import kl_divergence, log_score

__all__ = [
    "SparseICF",
    "assemble",
    "factor_from_triplets",
    "off_diagonal_triplets",
    "dense_covariance",
    "precision_matrix",
    "field_from_z",
    "sample_field",
    "sample_fields",
    "linear_comb_cov",
    "kl_divergence",
    "log_score",
]
