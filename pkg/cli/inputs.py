"""
读取数据文件并构造几何结构
"""
from pathlib import Path
from typing import Optional

import numpy as np

from config import get_settings
from errors import GeometryMismatch
from geometry import DistanceMetric, LocationSet, OrderedGeometry, build_geometry, prior_correlation_guess
from storage import read_locations, read_matrix


def load_data(data: Path, locations: Path) -> tuple[np.ndarray, LocationSet]:
    """读取 N×n 数据与 n 个站点，检查维度一致"""
    Y = read_matrix(data)
    locs = read_locations(locations)
    if Y.shape[1] != locs.n:
        raise GeometryMismatch(f"{data} has {Y.shape[1]} columns but {locations} has {locs.n} sites")
    return Y, locs


def make_metric(kind: str, Y: Optional[np.ndarray], locs: LocationSet, correlation: Optional[Path] = None) -> DistanceMetric:
    """euclid，或 corr（给定相关矩阵文件，否则用数据构造先验相关猜测）"""
    if kind == "euclid":
        locs.check_unique()
        return DistanceMetric.euclidean()
    if correlation is not None:
        R = read_matrix(correlation)
    else:
        if Y is None:
            raise GeometryMismatch("the correlation metric needs data or a correlation matrix")
        R = prior_correlation_guess(Y, locs)
    return DistanceMetric.correlation(R)


def make_geometry(
    Y: Optional[np.ndarray],
    locs: LocationSet,
    metric: str,
    ordering: str,
    m_max: Optional[int],
    correlation: Optional[Path] = None,
) -> OrderedGeometry:
    return build_geometry(
        locs,
        make_metric(metric, Y, locs, correlation),
        m_max=m_max or get_settings().m_max,
        ordering=ordering,
    )
