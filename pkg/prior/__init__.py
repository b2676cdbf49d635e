"""
先验参数模块
"""
from .column_prior import (
    ColumnPrior,
    PRIOR_SHAPE,
    f_decay,
    column_prior,
    column_prior_arrays,
    select_m,
)

__all__ = [
    "ColumnPrior",
    "PRIOR_SHAPE",
    "f_decay",
    "column_prior",
    "column_prior_arrays",
    "select_m",
]
