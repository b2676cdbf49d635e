"""
稀疏逆 Cholesky 因子
Σ⁻¹ = U D⁻¹ U′，U 为单位上三角稀疏矩阵（有序下标），U[g(i)_j, i] = u_ij
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from config import get_settings
from errors import DenseLimitExceeded, InvalidFactor
from geometry import OrderedGeometry


@dataclass(frozen=True)
class SparseICF:
    """稀疏逆 Cholesky 因子 (U, D) 及其排序"""
    U: sp.csr_matrix  # (n, n)，有序下标
    d: np.ndarray  # (n,)，D 的对角线
    perm: np.ndarray  # perm[k] = 第 k 个有序站点的原始下标

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @cached_property
    def inv_perm(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return inv

    @cached_property
    def _upper(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.U)

    @cached_property
    def _lower(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.U.T)


def assemble(geometry: OrderedGeometry, u: Sequence[np.ndarray], d: np.ndarray) -> SparseICF:
    """
    由逐列回归系数 u_i 与条件方差 d_i 组装 (U, D)

    u_i 的长度可以短于 g(i)，此时使用 g(i) 的前缀
    """
    n = geometry.n
    d = np.asarray(d, dtype=float)
    if len(u) != n or d.shape != (n,):
        raise InvalidFactor(f"expected {n} columns, got {len(u)} coefficient vectors and {d.shape} variances")

    rows, cols, vals = [], [], []
    for i, (g, u_i) in enumerate(zip(geometry.neighbors, u)):
        u_i = np.asarray(u_i, dtype=float)
        if u_i.ndim != 1 or len(u_i) > len(g):
            raise InvalidFactor(f"column {i}: {u_i.shape} coefficients for {len(g)} neighbors")
        k = len(u_i)
        rows.append(g[:k])
        cols.append(np.full(k, i))
        vals.append(u_i)

    return factor_from_triplets(
        np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64),
        np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64),
        np.concatenate(vals) if vals else np.zeros(0),
        d,
        geometry.perm,
    )


def factor_from_triplets(
    rows: np.ndarray,
    cols: np.ndarray,
    values: np.ndarray,
    d: np.ndarray,
    perm: np.ndarray,
) -> SparseICF:
    """
    由 U 的非对角元 (row, col, value)、D 的对角线与排序构造因子（有序下标）

    Raises:
        InvalidFactor: 行号不小于列号、重复元素、非有限值、d ≤ 0 或 perm 不是置换
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    d = np.asarray(d, dtype=float)
    perm = np.asarray(perm, dtype=np.int64)
    n = d.shape[0]

    if not (rows.shape == cols.shape == values.shape):
        raise InvalidFactor("row, column and value arrays differ in length")
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise InvalidFactor("perm is not a permutation of the sites")
    if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
        bad = int(np.flatnonzero(~(np.isfinite(d) & (d > 0.0)))[0])
        raise InvalidFactor(f"conditional variance of column {bad} is not positive: {d[bad]}")
    if rows.size:
        if rows.min() < 0 or cols.max() >= n or np.any(rows >= cols):
            raise InvalidFactor("U entries must lie strictly above the diagonal")
        if not np.all(np.isfinite(values)):
            raise InvalidFactor("U has non-finite entries")
        if len(np.unique(rows * n + cols)) != rows.size:
            raise InvalidFactor("U has duplicate entries")

    U = sp.csr_matrix(
        (
            np.concatenate([np.ones(n), values]),
            (np.concatenate([np.arange(n), rows]), np.concatenate([np.arange(n), cols])),
        ),
        shape=(n, n),
    )
    return SparseICF(U=U, d=d.copy(), perm=perm.copy())


def off_diagonal_triplets(icf: SparseICF) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """U 的非对角元，按 (col, row) 排序"""
    coo = sp.triu(icf.U, k=1).tocoo()
    order = np.lexsort((coo.row, coo.col))
    return coo.row[order].astype(np.int64), coo.col[order].astype(np.int64), coo.data[order]


def _whitened_inverse(icf: SparseICF, rhs: np.ndarray) -> np.ndarray:
    """D^{1/2} U⁻¹ rhs"""
    W = spsolve_triangular(icf._upper, rhs, lower=False)
    W = W.reshape(rhs.shape)
    return np.sqrt(icf.d)[:, None] * W


def dense_covariance(icf: SparseICF, dense_limit: Optional[int] = None) -> np.ndarray:
    """Σ = B′B，B = D^{1/2} U⁻¹，并还原到原始站点顺序"""
    limit = get_settings().dense_limit if dense_limit is None else dense_limit
    if icf.n > limit:
        raise DenseLimitExceeded(f"n={icf.n} exceeds the dense limit {limit}")
    B = _whitened_inverse(icf, np.eye(icf.n))
    sigma = B.T @ B
    sigma = (sigma + sigma.T) / 2.0
    inv = icf.inv_perm
    return sigma[np.ix_(inv, inv)]


def precision_matrix(icf: SparseICF, ordered: bool = False) -> sp.csr_matrix:
    """
    Σ⁻¹ = U D⁻¹ U′（稀疏）

    Args:
        ordered: True 时保持有序下标，否则还原到原始站点顺序
    """
    Q = sp.csr_matrix(icf.U @ sp.diags(1.0 / icf.d) @ icf.U.T)
    if ordered:
        return Q
    inv = icf.inv_perm
    return Q[inv][:, inv]


def field_from_z(icf: SparseICF, z: np.ndarray) -> np.ndarray:
    """
    解 U′y = D^{1/2} z 得到 y ~ N(0, Σ)

    Args:
        z: (n,) 或 (n, k) 的标准正态向量，有序下标
    Returns:
        与 z 同形状，原始站点顺序
    """
    z = np.asarray(z, dtype=float)
    rhs = np.sqrt(icf.d).reshape((-1,) + (1,) * (z.ndim - 1)) * z
    y = spsolve_triangular(icf._lower, rhs, lower=True).reshape(z.shape)
    return y[icf.inv_perm]


def sample_field(icf: SparseICF, rng: np.random.Generator) -> np.ndarray:
    """一次 N(0, Σ) 抽样，原始站点顺序"""
    return field_from_z(icf, rng.standard_normal(icf.n))


def sample_fields(icf: SparseICF, N: int, rng: np.random.Generator) -> np.ndarray:
    """N 次独立抽样，返回 (N, n)"""
    if N == 0:
        return np.zeros((0, icf.n))
    return field_from_z(icf, rng.standard_normal((icf.n, N))).T


def linear_comb_cov(icf: SparseICF, H) -> np.ndarray:
    """
    Cov(H y) = A′A，A = D^{1/2} U⁻¹ H_ord′

    Args:
        H: (k, n) 稠密或稀疏矩阵，列为原始站点顺序
    """
    H = H.toarray() if sp.issparse(H) else np.atleast_2d(np.asarray(H, dtype=float))
    if H.shape[1] != icf.n:
        raise InvalidFactor(f"H has {H.shape[1]} columns but the factor has {icf.n} sites")
    A = _whitened_inverse(icf, np.ascontiguousarray(H[:, icf.perm].T))
    cov = A.T @ A
    return (cov + cov.T) / 2.0
