"""
模拟场景的站点布局（单位正方形）
"""
import numpy as np

from errors import InputError
from geometry import LocationSet


def grid_locations(rows: int, cols: int) -> LocationSet:
    """rows×cols 规则网格，包含端点 0 和 1；按行优先（y 外层、x 内层）"""
    if rows < 1 or cols < 1:
        raise InputError(f"grid must be at least 1x1, got {rows}x{cols}")
    xs = np.linspace(0.0, 1.0, cols) if cols > 1 else np.array([0.5])
    ys = np.linspace(0.0, 1.0, rows) if rows > 1 else np.array([0.5])
    gx, gy = np.meshgrid(xs, ys)
    return LocationSet(np.column_stack([gx.ravel(), gy.ravel()]))


def random_locations(n: int, seed: int, p: int = 2) -> LocationSet:
    """单位超立方体上均匀随机的 n 个站点"""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return LocationSet(rng.uniform(0.0, 1.0, size=(n, p)))
