"""
列先验参数
θ → (α_i, β_i, V_i) 以及条件集大小 m
"""
import math
from dataclasses import dataclass

import numpy as np

from models import Hyperparameters

# 先验形状参数固定为 6：先验标准差为均值的一半
PRIOR_SHAPE = 6.0
# 先验方差衰减阈值：m 为 exp(−θ3 j) > 0.001 的最大 j
DECAY_THRESHOLD = 1e-3
# v_ij 下限（对数尺度），保证 V⁻¹ 有限
LOG_V_FLOOR = math.log(np.finfo(float).tiny)


@dataclass(frozen=True)
class ColumnPrior:
    """第 i 列的 NIG 先验"""
    alpha: float
    beta: float
    v: np.ndarray  # V_i 的对角线，长度 m_i

    @property
    def log_v(self) -> np.ndarray:
        return np.log(self.v)


def f_decay(i, theta2: float, p: int):
    """f_{θ2}(i) = 1 − exp(−θ2·i^{−1/p})，i 为 1 起始的有序下标（可为数组）"""
    i = np.asarray(i, dtype=float)
    out = -np.expm1(-theta2 * i ** (-1.0 / p))
    return float(out) if out.ndim == 0 else out


def column_prior(i: int, theta: Hyperparameters, p: int, m_i: int) -> ColumnPrior:
    """
    第 i 列（1 起始）的先验:
      α = 6, β = 5·θ1·f(i), v_j = exp(−θ3·j)/(θ1·f(i))，j = 1..m_i
    """
    scale = theta.theta1 * f_decay(i, theta.theta2, p)
    j = np.arange(1, m_i + 1, dtype=float)
    log_v = np.maximum(-theta.theta3 * j - math.log(scale), LOG_V_FLOOR)
    return ColumnPrior(
        alpha=PRIOR_SHAPE,
        beta=(PRIOR_SHAPE - 1.0) * scale,
        v=np.exp(log_v),
    )


def column_prior_arrays(n: int, theta: Hyperparameters, p: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    全部 n 列的先验（向量化）

    Returns:
        (alpha (n,), beta (n,), log_v (n, m))，第 k 行对应有序下标 k（0 起始），
        只有前 min(m, k) 个 log_v 有意义
    """
    scale = theta.theta1 * f_decay(np.arange(1, n + 1), theta.theta2, p)
    j = np.arange(1, m + 1, dtype=float)
    log_v = np.maximum(-theta.theta3 * j[None, :] - np.log(scale)[:, None], LOG_V_FLOOR)
    alpha = np.full(n, PRIOR_SHAPE)
    beta = (PRIOR_SHAPE - 1.0) * scale
    return alpha, beta, log_v


def select_m(theta3: float, m_max: int) -> int:
    """满足 exp(−θ3·j) > 0.001 的最大 j，截断到 [1, m_max]"""
    # θ3 极小（含次正规数）时 bound 溢出为 inf，先截断
    bound = min(math.log(1.0 / DECAY_THRESHOLD) / theta3, m_max + 1.0)
    raw = math.ceil(bound) - 1  # 严格不等式 j < bound
    return int(min(max(raw, 1), m_max))
