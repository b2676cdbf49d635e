"""
最大最小距离（maximin）排序与最近邻条件集
精确 O(n²·p) 实现；所有并列一律取较小下标
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from config import log
from errors import DuplicateLocation, InputError, TruncationError
from .locations import DistanceMetric, LocationSet


@dataclass(frozen=True)
class OrderedGeometry:
    """排序后的几何结构：置换、逆置换与每个有序下标的条件集 g(i)"""
    perm: np.ndarray  # perm[k] = 第 k 个有序站点的原始下标
    neighbors: tuple[np.ndarray, ...]  # neighbors[k]: 有序下标 < k，按距离由近到远
    m_max: int
    p: int

    @property
    def n(self) -> int:
        return len(self.perm)

    @cached_property
    def inv_perm(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return inv

    @cached_property
    def counts(self) -> np.ndarray:
        return np.array([len(g) for g in self.neighbors], dtype=np.int64)

    @cached_property
    def padded(self) -> np.ndarray:
        """(n, m_max) 的近邻矩阵，不足部分填 -1"""
        width = int(self.counts.max()) if self.n else 0
        out = np.full((self.n, width), -1, dtype=np.int64)
        for k, g in enumerate(self.neighbors):
            out[k, : len(g)] = g
        return out

    @property
    def nonzeros(self) -> int:
        return int(self.counts.sum())


def maximin_order(locs: LocationSet, metric: DistanceMetric) -> np.ndarray:
    """
    贪心 maximin 排序

    第一个点为起点（见 DistanceMetric.seed），之后每一步选择到已选集合最小距离最大的点。

    Returns:
        perm，perm[k] 为第 k 个被选中站点的原始下标
    """
    metric.check(locs)
    n = locs.n
    perm = np.empty(n, dtype=np.int64)
    seed = metric.seed(locs)
    perm[0] = seed
    if n == 1:
        return perm

    # 每个未选点到已选集合的最小距离；已选点置为 -inf
    min_dist = metric.row(locs, seed).astype(float, copy=True)
    min_dist[seed] = -np.inf

    for k in range(1, n):
        j = int(np.argmax(min_dist))
        if min_dist[j] <= 0.0:
            raise DuplicateLocation(
                f"site {j} coincides with an already ordered site under the {metric.kind} metric"
            )
        perm[k] = j
        np.minimum(min_dist, metric.row(locs, j), out=min_dist)
        min_dist[j] = -np.inf

    return perm


def coordinate_order(locs: LocationSet, axis: int = 0) -> np.ndarray:
    """按某一坐标轴排序（其余坐标、原始下标依次作为并列规则）"""
    if not 0 <= axis < locs.p:
        raise InputError(f"axis {axis} out of range for p={locs.p}")
    # 顺序只由坐标决定，与条件集使用的度量无关
    locs.check_unique()
    keys = [np.arange(locs.n)]
    keys += [locs.coords[:, a] for a in reversed(range(locs.p)) if a != axis]
    keys.append(locs.coords[:, axis])
    return np.lexsort(keys).astype(np.int64)


def conditioning_sets(
    locs: LocationSet,
    perm: np.ndarray,
    metric: DistanceMetric,
    m_max: int,
) -> tuple[np.ndarray, ...]:
    """
    最近邻条件集

    对每个有序下标 k，取之前已排序站点中距离最近的 min(m_max, k) 个，
    按距离由近到远排列；距离相同时有序下标小者在前。
    """
    if m_max < 1:
        raise InputError(f"m_max must be >= 1, got {m_max}")
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(locs.n)):
        raise InputError("perm is not a permutation of the sites")
    metric.check(locs)

    sets: list[np.ndarray] = [np.empty(0, dtype=np.int64)]
    for k in range(1, len(perm)):
        c = min(m_max, k)
        d = metric.row(locs, int(perm[k]), perm[:k])
        if c < k:
            # 先按第 c 小的距离取候选（含边界并列），再稳定排序
            kth = np.partition(d, c - 1)[c - 1]
            cand = np.flatnonzero(d <= kth)
        else:
            cand = np.arange(k)
        order = cand[np.argsort(d[cand], kind="stable")][:c]
        sets.append(order.astype(np.int64))
    return tuple(sets)


def truncate_sets(geometry: OrderedGeometry, m: int) -> OrderedGeometry:
    """取每个 g(i) 的前 min(m, i) 个元素"""
    if m > geometry.m_max:
        raise TruncationError(f"m={m} exceeds m_max={geometry.m_max}")
    if m < 1:
        raise TruncationError(f"m must be >= 1, got {m}")
    if m == geometry.m_max:
        return geometry
    return OrderedGeometry(
        perm=geometry.perm,
        neighbors=tuple(g[:m] for g in geometry.neighbors),
        m_max=m,
        p=geometry.p,
    )


def build_geometry(
    locs: LocationSet,
    metric: DistanceMetric | None = None,
    m_max: int = 50,
    ordering: Literal["maximin", "coordinate"] = "maximin",
) -> OrderedGeometry:
    """排序 + 条件集"""
    metric = metric or DistanceMetric.euclidean()
    if ordering == "maximin":
        perm = maximin_order(locs, metric)
    elif ordering == "coordinate":
        perm = coordinate_order(locs)
    else:
        raise InputError(f"unknown ordering: {ordering}")
    sets = conditioning_sets(locs, perm, metric, m_max)
    log("Geometry", f"ordered {locs.n} sites ({ordering}, {metric.kind}, m_max={m_max})")
    return OrderedGeometry(perm=perm, neighbors=sets, m_max=m_max, p=locs.p)
