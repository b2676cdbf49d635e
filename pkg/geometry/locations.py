"""
空间位置与距离度量
"""
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from errors import DuplicateLocation, GeometryMismatch, InputError


@dataclass(frozen=True)
class LocationSet:
    """n 个 p 维站点坐标"""
    coords: np.ndarray  # (n, p)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise InputError(f"locations must be an n x p matrix, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise InputError("locations contain non-finite coordinates")
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def p(self) -> int:
        return self.coords.shape[1]

    def check_unique(self) -> None:
        """拒绝重复站点"""
        _, first, counts = np.unique(self.coords, axis=0, return_index=True, return_counts=True)
        if np.any(counts > 1):
            dup = int(first[np.argmax(counts > 1)])
            raise DuplicateLocation(f"duplicate location at index {dup}: {self.coords[dup].tolist()}")

    def subset(self, index: np.ndarray) -> "LocationSet":
        return LocationSet(self.coords[np.asarray(index)])


@dataclass(frozen=True)
class DistanceMetric:
    """
    距离度量
    - euclid: 欧氏距离
    - corr: 相关距离 d(i,j) = (1 − |R_ij|)^{1/2}
    """
    kind: Literal["euclid", "corr"] = "euclid"
    R: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "corr":
            if self.R is None:
                raise InputError("correlation metric requires a correlation matrix")
            R = np.asarray(self.R, dtype=float)
            if R.ndim != 2 or R.shape[0] != R.shape[1]:
                raise InputError(f"correlation matrix must be square, got shape {R.shape}")
            if not np.allclose(R, R.T, atol=1e-10):
                raise InputError("correlation matrix must be symmetric")
            if not np.allclose(np.diag(R), 1.0, atol=1e-10):
                raise InputError("correlation matrix must have unit diagonal")
            if np.any(np.abs(R) > 1.0 + 1e-10):
                raise InputError("correlation entries must lie in [-1, 1]")
            object.__setattr__(self, "R", R)
        elif self.kind != "euclid":
            raise InputError(f"unknown metric: {self.kind}")

    @classmethod
    def euclidean(cls) -> "DistanceMetric":
        return cls("euclid")

    @classmethod
    def correlation(cls, R: np.ndarray) -> "DistanceMetric":
        return cls("corr", R)

    def check(self, locs: LocationSet) -> None:
        if self.kind == "corr" and self.R.shape[0] != locs.n:
            raise GeometryMismatch(
                f"correlation matrix is {self.R.shape[0]}x{self.R.shape[0]} but there are {locs.n} sites"
            )

    def row(self, locs: LocationSet, i: int, index: Optional[np.ndarray] = None) -> np.ndarray:
        """站点 i 到 index 中各站点（默认全部）的距离"""
        if self.kind == "euclid":
            pts = locs.coords if index is None else locs.coords[index]
            diff = pts - locs.coords[i]
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        r = self.R[i] if index is None else self.R[i, index]
        return np.sqrt(np.clip(1.0 - np.abs(r), 0.0, None))

    def seed(self, locs: LocationSet) -> int:
        """排序起点：欧氏取距质心最近者，相关度量取 |R| 行和最大者；并列取最小下标"""
        if self.kind == "euclid":
            centroid = locs.coords.mean(axis=0)
            diff = locs.coords - centroid
            return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
        return int(np.argmax(np.abs(self.R).sum(axis=1)))
