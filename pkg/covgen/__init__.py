"""
协方差生成与模拟模块
"""
from .kernels import build_covariance, matern_correlation
from .simulate import simulate_replicates, taper
from .sites import grid_locations, random_locations

__all__ = [
    "build_covariance",
    "matern_correlation",
    "simulate_replicates",
    "taper",
    "grid_locations",
    "random_locations",
]
