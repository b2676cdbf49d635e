"""
相关距离排序用的先验相关矩阵
样本相关 ∘ 大范围指数相关
"""
import numpy as np
from scipy.spatial.distance import cdist, pdist

from errors import InputError, InsufficientReplicates
from .locations import LocationSet


def sample_correlation(Y: np.ndarray) -> np.ndarray:
    """样本相关矩阵；方差为零的列非对角相关记为 0"""
    Y = np.asarray(Y, dtype=float)
    centered = Y - Y.mean(axis=0)
    sd = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    scale = np.where(sd > 0, sd, 1.0)
    z = centered / scale
    R = z.T @ z
    zero = sd == 0
    R[zero, :] = 0.0
    R[:, zero] = 0.0
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)


def prior_correlation_guess(Y: np.ndarray, locs: LocationSet) -> np.ndarray:
    """
    R_ij = samplecorr(Y)_ij · exp(−d_E(i,j)/ρ)，ρ 为最大站点间距的一半，对角线为 1
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[1] != locs.n:
        raise InputError(f"data has shape {Y.shape}, expected N x {locs.n}")
    if Y.shape[0] < 2:
        raise InsufficientReplicates(f"need at least 2 replicates, got {Y.shape[0]}")
    if locs.n < 2:
        raise InputError("need at least two locations")

    rho = pdist(locs.coords).max() / 2.0
    if rho <= 0:
        raise InputError("need at least two distinct locations")
    taper = np.exp(-cdist(locs.coords, locs.coords) / rho)
    R = sample_correlation(Y) * taper
    np.fill_diagonal(R, 1.0)
    return R
