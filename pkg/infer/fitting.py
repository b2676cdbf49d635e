"""
拟合流程
几何 → 先验 → 逐列后验 → 因子；以及后验协方差抽样与可信区间
"""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Optional, Sequence

import numpy as np

from assembly import SparseICF, assemble, dense_covariance
from config import get_settings, log
from errors import InputError
from geometry import OrderedGeometry
from models import Hyperparameters, MHConfig
from prior import column_prior, select_m
from regress import (
    ColumnPosterior,
    column_map,
    column_rng,
    column_sample,
    extract_regression,
    integrated_log_likelihood,
    nig_posterior,
)
from .empirical_bayes import empirical_bayes
from .mh import MHResult, adaptive_mh

# 每个线程任务处理的列数
COLUMN_BLOCK = 256


def column_posteriors(
    Y_ordered: np.ndarray,
    geometry: OrderedGeometry,
    theta: Hyperparameters,
    m: Optional[int] = None,
    threads: int = 1,
) -> list[ColumnPosterior]:
    """全部 n 列的 NIG 后验，按有序下标排列"""
    Y_ordered = np.asarray(Y_ordered, dtype=float)
    if m is None:
        m = select_m(theta.theta3, geometry.m_max)
    m = min(m, geometry.m_max)

    def one(k: int) -> ColumnPosterior:
        g = geometry.neighbors[k][:m]
        prior = column_prior(k + 1, theta, geometry.p, len(g))
        return nig_posterior(extract_regression(Y_ordered, g, k), prior, column=k)

    blocks = [range(s, min(s + COLUMN_BLOCK, geometry.n)) for s in range(0, geometry.n, COLUMN_BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: [one(k) for k in b], blocks))
        return [post for part in parts for post in part]
    return [one(k) for k in range(geometry.n)]


def map_factor(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    theta: Hyperparameters,
    convention: Optional[Literal["marginal", "joint"]] = None,
    threads: int = 1,
) -> SparseICF:
    """θ 固定时的 MAP 因子 (Û, D̂)；Y 为原始站点顺序"""
    convention = convention or get_settings().map_convention
    posts = column_posteriors(np.asarray(Y, dtype=float)[:, geometry.perm], geometry, theta, threads=threads)
    pairs = [column_map(post, convention) for post in posts]
    return assemble(geometry, [u for u, _ in pairs], np.array([d for _, d in pairs]))


def draw_factor(
    Y_ordered: np.ndarray,
    geometry: OrderedGeometry,
    theta: Hyperparameters,
    seed: int | Sequence[int],
    threads: int = 1,
) -> SparseICF:
    """从 p(U, D | Y, θ) 抽取一个因子；第 k 列使用 column_rng(seed, k)"""
    posts = column_posteriors(Y_ordered, geometry, theta, threads=threads)
    draws = [column_sample(post, column_rng(seed, k)) for k, post in enumerate(posts)]
    return assemble(geometry, [u for u, _ in draws], np.array([d for _, d in draws]))


@dataclass
class FitResult:
    """fit 的结果：θ 估计、对应的 MAP 因子，以及全贝叶斯模式下的链"""
    mode: Literal["eb", "bayes"]
    theta: Hyperparameters
    factor: SparseICF
    log_likelihood: float
    m: int
    runtime_s: float
    mh: Optional[MHResult] = None


def fit_map(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    init: Optional[Hyperparameters] = None,
    threads: int = 1,
) -> FitResult:
    """经验贝叶斯 θ̂ + MAP 因子"""
    start = time.perf_counter()
    theta = empirical_bayes(Y, geometry, init=init, threads=threads)
    factor = map_factor(Y, geometry, theta, threads=threads)
    loglik = integrated_log_likelihood(np.asarray(Y, dtype=float)[:, geometry.perm], geometry, theta, threads=threads)
    return FitResult(
        mode="eb",
        theta=theta,
        factor=factor,
        log_likelihood=loglik,
        m=select_m(theta.theta3, geometry.m_max),
        runtime_s=time.perf_counter() - start,
    )


def fit_bayes(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    config: MHConfig,
    threads: int = 1,
) -> FitResult:
    """自适应 MH 链 + 后验均值 θ 处的 MAP 因子"""
    start = time.perf_counter()
    result = adaptive_mh(Y, geometry, config, threads=threads)
    if len(result.log_chain) == 0:
        raise InputError("the MH chain kept no samples; increase n_iter or decrease n_burn")
    theta = result.posterior_mean()
    factor = map_factor(Y, geometry, theta, threads=threads)
    loglik = integrated_log_likelihood(np.asarray(Y, dtype=float)[:, geometry.perm], geometry, theta, threads=threads)
    return FitResult(
        mode="bayes",
        theta=theta,
        factor=factor,
        log_likelihood=loglik,
        m=select_m(theta.theta3, geometry.m_max),
        runtime_s=time.perf_counter() - start,
        mh=result,
    )


def posterior_factor_draws(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    thetas: Iterable[Hyperparameters],
    seed: int,
    threads: int = 1,
) -> Iterator[SparseICF]:
    """对每个 θ 抽样各抽一个 (U, D)；第 k 次抽样使用子流 (seed, k)"""
    Y_ordered = np.asarray(Y, dtype=float)[:, geometry.perm]
    for k, theta in enumerate(thetas):
        yield draw_factor(Y_ordered, geometry, theta, (seed, k), threads=threads)


@dataclass
class CovarianceSummary:
    """后验协方差摘要：Σ 的后验均值与选定元素的抽样值"""
    mean: np.ndarray  # (n, n)，原始站点顺序
    pairs: np.ndarray  # (k, 2)
    entry_draws: np.ndarray  # (k, n_draws)
    n_draws: int


def posterior_covariance_summary(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    thetas: Sequence[Hyperparameters],
    seed: int,
    pairs: Optional[np.ndarray] = None,
    threads: int = 1,
) -> CovarianceSummary:
    """逐个抽样因子还原稠密 Σ，累计均值并记录 pairs 中各元素的抽样值"""
    if len(thetas) == 0:
        raise InputError("at least one θ draw is required")
    n = geometry.n
    pairs = np.zeros((0, 2), dtype=np.int64) if pairs is None else np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    total = np.zeros((n, n))
    entries = np.zeros((len(pairs), len(thetas)))
    for k, factor in enumerate(posterior_factor_draws(Y, geometry, thetas, seed, threads=threads)):
        sigma = dense_covariance(factor)
        total += sigma
        entries[:, k] = sigma[pairs[:, 0], pairs[:, 1]]
    log("Fit", f"posterior covariance from {len(thetas)} factor draws")
    return CovarianceSummary(mean=total / len(thetas), pairs=pairs, entry_draws=entries, n_draws=len(thetas))


def credible_intervals(entry_draws: np.ndarray, level: float = 0.8) -> tuple[np.ndarray, np.ndarray]:
    """等尾可信区间，每行一个元素"""
    if not 0.0 < level < 1.0:
        raise InputError(f"level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(np.asarray(entry_draws, dtype=float), [tail, 1.0 - tail], axis=1)
    return lo, hi


def interval_coverage(lo: np.ndarray, hi: np.ndarray, truth: np.ndarray) -> float:
    """真值落入区间的比例"""
    truth = np.asarray(truth, dtype=float)
    if truth.size == 0:
        return float("nan")
    return float(np.mean((lo <= truth) & (truth <= hi)))
