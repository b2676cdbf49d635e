"""
积分对数似然 log p(Y | θ)

对所有列求和；列之间相互独立，按近邻数分组后批量分解：
  m_i ≤ N 时分解 m_i×m_i 的 X′X + V⁻¹，否则分解 N×N 的 I + XVX′
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.special import gammaln

from errors import GeometryMismatch, PosteriorFactorizationError
from geometry import OrderedGeometry
from models import Hyperparameters
from prior import column_prior, column_prior_arrays, select_m
from .posterior import extract_regression, nig_posterior

# 每个批次的列数
BLOCK_SIZE = 512


def _group_terms(
    Y: np.ndarray,
    cols: np.ndarray,
    nbrs: np.ndarray,
    alpha: np.ndarray,
    beta: np.ndarray,
    log_v: np.ndarray,
) -> np.ndarray:
    """同一近邻数 c 的一批列的对数似然项"""
    N = Y.shape[0]
    c = nbrs.shape[1]
    y = Y[:, cols].T  # (k, N)
    yy = np.einsum("kn,kn->k", y, y)
    alpha_t = alpha + N / 2.0

    if c == 0:
        half_logdet = np.zeros(len(cols))
        beta_t = beta + yy / 2.0
    else:
        X = -np.transpose(Y[:, nbrs], (1, 0, 2))  # (k, N, c)
        v = np.exp(log_v)
        if c <= N:
            A = np.einsum("knc,knd->kcd", X, X)
            A[:, np.arange(c), np.arange(c)] += np.exp(-log_v)
            L = np.linalg.cholesky(A)
            b = np.einsum("knc,kn->kc", X, y)
            z = np.linalg.solve(L, b[..., None])[..., 0]
            beta_t = beta + (yy - np.einsum("kc,kc->k", z, z)) / 2.0
            logdet_A = 2.0 * np.log(np.diagonal(L, axis1=1, axis2=2)).sum(axis=1)
            # log|G| − log|V| = −log|A| − Σ log v
            half_logdet = -0.5 * (logdet_A + log_v.sum(axis=1))
        else:
            B = np.einsum("knc,kc,kmc->knm", X, v, X)
            B[:, np.arange(N), np.arange(N)] += 1.0
            L = np.linalg.cholesky(B)
            z = np.linalg.solve(L, y[..., None])[..., 0]
            beta_t = beta + np.einsum("kn,kn->k", z, z) / 2.0
            half_logdet = -np.log(np.diagonal(L, axis1=1, axis2=2)).sum(axis=1)

    return (
        half_logdet
        + alpha * np.log(beta)
        - alpha_t * np.log(beta_t)
        + gammaln(alpha_t)
        - gammaln(alpha)
        - 0.5 * N * math.log(2.0 * math.pi)
    )


def _locate_failure(Y, cols, geometry, theta, p, counts) -> int:
    """批量分解失败时逐列重算，找出第一个失败的列"""
    for k in cols:
        k = int(k)
        g = geometry.neighbors[k][: counts[k]]
        prior = column_prior(k + 1, theta, p, len(g))
        try:
            nig_posterior(extract_regression(Y, g, k), prior, column=k)
        except PosteriorFactorizationError:
            return k
    return int(cols[0])


def column_log_terms(
    Y_ordered: np.ndarray,
    geometry: OrderedGeometry,
    theta: Hyperparameters,
    m: Optional[int] = None,
    threads: int = 1,
) -> np.ndarray:
    """
    每列的对数似然项（按有序下标排列）

    Args:
        Y_ordered: (N, n) 已按 geometry.perm 重排的数据
        m: 条件集大小；默认由 θ3 决定
        threads: 并行线程数，结果与线程数无关
    """
    Y = np.asarray(Y_ordered, dtype=float)
    if Y.ndim != 2 or Y.shape[1] != geometry.n:
        raise GeometryMismatch(f"data has shape {Y.shape} but the geometry has {geometry.n} sites")
    n = geometry.n
    p = geometry.p
    if m is None:
        m = select_m(theta.theta3, geometry.m_max)
    m = min(m, geometry.m_max)

    out = np.zeros(n)
    if Y.shape[0] == 0:
        return out

    counts = np.minimum(geometry.counts, m)
    alpha, beta, log_v = column_prior_arrays(n, theta, p, max(m, 1))
    padded = geometry.padded

    jobs = []
    for c in np.unique(counts):
        cols = np.flatnonzero(counts == c)
        for start in range(0, len(cols), BLOCK_SIZE):
            jobs.append((int(c), cols[start : start + BLOCK_SIZE]))

    def run(job):
        c, cols = job
        try:
            return cols, _group_terms(Y, cols, padded[cols, :c], alpha[cols], beta[cols], log_v[cols, :c])
        except np.linalg.LinAlgError as e:
            col = _locate_failure(Y, cols, geometry, theta, p, counts)
            raise PosteriorFactorizationError(col, str(e)) from e

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    for cols, terms in results:
        out[cols] = terms
    return out


def integrated_log_likelihood(
    Y_ordered: np.ndarray,
    geometry: OrderedGeometry,
    theta: Hyperparameters,
    m: Optional[int] = None,
    threads: int = 1,
) -> float:
    """log p(Y | θ) = Σ_i log p(y_i | Y_{g(i)}, θ)，按列顺序求和"""
    return float(np.sum(column_log_terms(Y_ordered, geometry, theta, m=m, threads=threads)))
