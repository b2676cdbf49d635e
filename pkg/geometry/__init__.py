"""
空间几何模块
"""
from .locations import LocationSet, DistanceMetric
from .ordering import (
    OrderedGeometry,
    maximin_order,
    coordinate_order,
    conditioning_sets,
    truncate_sets,
    build_geometry,
)
from .correlation import prior_correlation_guess, sample_correlation

__all__ = [
    "LocationSet",
    "DistanceMetric",
    "OrderedGeometry",
    "maximin_order",
    "coordinate_order",
    "conditioning_sets",
    "truncate_sets",
    "build_geometry",
    "prior_correlation_guess",
    "sample_correlation",
]
