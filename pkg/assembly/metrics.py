"""
估计质量指标
"""
import math

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from errors import InputError, NotPositiveDefinite, SingularEstimate


def _logdet_chol(L: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def kl_divergence(sigma_hat: np.ndarray, sigma: np.ndarray, halve: bool = False) -> float:
    """
    KL = tr(Σ̂Σ⁻¹) − log|Σ̂Σ⁻¹| − n

    halve=True 时乘以 1/2（标准 KL 散度）。Σ̂ 非正定时抛出 SingularEstimate。
    """
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if sigma_hat.shape != sigma.shape or sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InputError(f"shape mismatch: {sigma_hat.shape} vs {sigma.shape}")
    n = sigma.shape[0]
    try:
        L = cholesky(sigma, lower=True)
    except LinAlgError as e:
        raise NotPositiveDefinite("reference covariance is not positive definite") from e
    try:
        L_hat = cholesky(sigma_hat, lower=True)
    except LinAlgError as e:
        raise SingularEstimate("estimated covariance is not positive definite") from e

    # tr(Σ̂Σ⁻¹) = ‖L⁻¹ L̂‖_F²
    M = solve_triangular(L, L_hat, lower=True)
    value = float(np.sum(M * M)) - (_logdet_chol(L_hat) - _logdet_chol(L)) - n
    return value / 2.0 if halve else value


def log_score(sigma: np.ndarray, Y_test: np.ndarray) -> float:
    """留出数据在 N(0, Σ) 下的平均负对数密度"""
    sigma = np.asarray(sigma, dtype=float)
    Y_test = np.atleast_2d(np.asarray(Y_test, dtype=float))
    n = sigma.shape[0]
    if Y_test.shape[1] != n:
        raise InputError(f"test data has {Y_test.shape[1]} sites but the covariance has {n}")
    if Y_test.shape[0] == 0:
        raise InputError("test data is empty")
    try:
        L = cholesky(sigma, lower=True)
    except LinAlgError as e:
        raise SingularEstimate("estimated covariance is not positive definite") from e
    Z = solve_triangular(L, Y_test.T, lower=True)
    quad = np.sum(Z * Z, axis=0)
    return float(np.mean(0.5 * quad) + 0.5 * _logdet_chol(L) + 0.5 * n * math.log(2.0 * math.pi))
