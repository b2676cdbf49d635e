"""
逐列贝叶斯回归
回归问题的构造、共轭 NIG 后验、MAP 与后验采样
"""
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky, solve_triangular
from scipy.stats import invgamma

from errors import GeometryMismatch, InputError, PosteriorFactorizationError
from prior import ColumnPrior


@dataclass(frozen=True)
class ColumnRegression:
    """y_i = X_i u_i + ε，X_i 第 ℓ 行为 −y^{(ℓ)}_{g(i)}"""
    y: np.ndarray  # (N,)
    X: np.ndarray  # (N, m_i)

    @property
    def N(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class ColumnPosterior:
    """N(u | û, d·G) · IG(d | α̃, β̃)"""
    u_hat: np.ndarray  # (m_i,)
    G: np.ndarray  # (m_i, m_i)
    alpha_t: float
    beta_t: float
    precision_chol: np.ndarray  # G⁻¹ 的下三角 Cholesky 因子，用于采样

    @property
    def m(self) -> int:
        return self.u_hat.shape[0]


def extract_regression(Y_ordered: np.ndarray, g_i: np.ndarray, i: int) -> ColumnRegression:
    """取第 i 列（0 起始有序下标）的回归数据"""
    Y_ordered = np.asarray(Y_ordered, dtype=float)
    n = Y_ordered.shape[1]
    g_i = np.asarray(g_i, dtype=np.int64)
    if not 0 <= i < n:
        raise GeometryMismatch(f"column {i} out of range for n={n}")
    if g_i.size and (g_i.min() < 0 or g_i.max() >= i):
        raise GeometryMismatch(f"conditioning set of column {i} must index earlier columns")
    return ColumnRegression(y=Y_ordered[:, i].copy(), X=-Y_ordered[:, g_i])


def nig_posterior(
    reg: ColumnRegression,
    prior: ColumnPrior,
    path: Literal["auto", "precision", "small_n"] = "auto",
    column: int = -1,
) -> ColumnPosterior:
    """
    共轭后验
      G = (X′X + V⁻¹)⁻¹, û = G X′y, α̃ = α + N/2,
      β̃ = β + (y′y − û′G⁻¹û)/2 = β + y′(I + XVX′)⁻¹y/2

    path:
      precision 分解 m×m 的 X′X + V⁻¹；small_n 分解 N×N 的 I + XVX′；
      auto 在 m ≤ N 时走 precision，否则走 small_n
    """
    X, y = reg.X, reg.y
    N, m = X.shape
    if prior.v.shape[0] != m:
        raise InputError(f"prior has {prior.v.shape[0]} variances but the design has {m} columns")
    alpha_t = prior.alpha + N / 2.0

    if path == "auto":
        path = "precision" if m <= N or N == 0 else "small_n"

    try:
        A = X.T @ X + np.diag(1.0 / prior.v)
        L_A = cholesky(A, lower=True) if m else np.zeros((0, 0))

        if path == "precision":
            b = X.T @ y
            u_hat = cho_solve((L_A, True), b) if m else np.zeros(0)
            G = cho_solve((L_A, True), np.eye(m)) if m else np.zeros((0, 0))
            beta_t = prior.beta + (y @ y - b @ u_hat) / 2.0
        else:
            B = np.eye(N) + (X * prior.v) @ X.T
            cho_B = cho_factor(B, lower=True)
            w = cho_solve(cho_B, y)
            u_hat = prior.v * (X.T @ w)
            VXt = (X * prior.v).T
            G = np.diag(prior.v) - VXt @ cho_solve(cho_B, VXt.T)
            beta_t = prior.beta + (y @ w) / 2.0
    except LinAlgError as e:
        raise PosteriorFactorizationError(column, str(e)) from e

    return ColumnPosterior(
        u_hat=u_hat,
        G=(G + G.T) / 2.0,
        alpha_t=float(alpha_t),
        beta_t=float(beta_t),
        precision_chol=L_A,
    )


def beta_tilde_small_n(reg: ColumnRegression, prior: ColumnPrior) -> float:
    """β̃ 的 N×N 形式：β + y′(I_N + XVX′)⁻¹y/2"""
    N = reg.N
    if N == 0:
        return prior.beta
    B = np.eye(N) + (reg.X * prior.v) @ reg.X.T
    return float(prior.beta + reg.y @ cho_solve(cho_factor(B, lower=True), reg.y) / 2.0)


def column_map(
    post: ColumnPosterior,
    convention: Literal["marginal", "joint"] = "marginal",
) -> tuple[np.ndarray, float]:
    """
    MAP 估计: u = û；d 取边际 IG 众数 β̃/(α̃+1)，或联合众数 β̃/(α̃ + m/2 + 1)
    """
    if convention == "marginal":
        d = post.beta_t / (post.alpha_t + 1.0)
    elif convention == "joint":
        d = post.beta_t / (post.alpha_t + post.m / 2.0 + 1.0)
    else:
        raise InputError(f"unknown MAP convention: {convention}")
    return post.u_hat.copy(), float(d)


def column_sample(post: ColumnPosterior, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """d ~ IG(α̃, β̃)，再 u ~ N(û, d·G)"""
    d = float(invgamma.rvs(post.alpha_t, scale=post.beta_t, random_state=rng))
    if post.m == 0:
        return np.zeros(0), d
    z = rng.standard_normal(post.m)
    # G = L^{-T} L^{-1}，故 L^{-T} z ~ N(0, G)
    u = post.u_hat + np.sqrt(d) * solve_triangular(post.precision_chol, z, lower=True, trans="T")
    return u, d


def column_rng(seed: int | Sequence[int], column: int) -> np.random.Generator:
    """按（主种子, 列号）派生的独立随机流；seed 可以是整数元组（如 (主种子, 抽样序号)）"""
    keys = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    return np.random.default_rng([*keys, int(column)])
