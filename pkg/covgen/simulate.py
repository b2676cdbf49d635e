"""
高斯重复样本模拟与协方差锥化
"""
import numpy as np
from scipy.linalg import LinAlgError, cholesky
from scipy.spatial.distance import cdist

from errors import InputError, NotPositiveDefinite
from geometry import LocationSet


def simulate_replicates(sigma: np.ndarray, N: int, seed: int, jitter: float = 0.0) -> np.ndarray:
    """
    生成 N 个独立的 N_n(0, Σ) 样本（每行一个），y = L z，L 为 Σ 的下三角 Cholesky 因子

    Args:
        jitter: 分解前加到对角线上的数值块金（默认不加）
    """
    if N < 1:
        raise InputError(f"N must be >= 1, got {N}")
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    try:
        L = cholesky(sigma + jitter * np.eye(n), lower=True)
    except LinAlgError as e:
        raise NotPositiveDefinite(f"covariance is not positive definite: {e}") from e

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((N, n))
    return z @ L.T


def taper(sigma: np.ndarray, locs: LocationSet, taper_range: float, nugget: float = 0.0) -> np.ndarray:
    """result_ij = Σ_ij · exp(−d_E(i,j)/taper_range) + nugget·1{i=j}"""
    if taper_range <= 0:
        raise InputError(f"taper_range must be positive, got {taper_range}")
    if nugget < 0:
        raise InputError(f"nugget must be non-negative, got {nugget}")
    out = np.asarray(sigma, dtype=float) * np.exp(-cdist(locs.coords, locs.coords) / taper_range)
    out[np.diag_indices_from(out)] += nugget
    return out
