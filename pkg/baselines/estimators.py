"""
基准估计方法
SCOV（样本协方差）、SCOVT（锥化样本协方差）、MLE（逐列回归极大似然）、EXP（指数协方差拟合）
"""
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, pinv
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import cdist, pdist

from assembly import SparseICF, assemble, dense_covariance
from config import Settings, get_settings, log
from covgen import taper
from errors import DenseLimitExceeded, InputError, InsufficientReplicates
from geometry import LocationSet, OrderedGeometry

# benchmark 表中使用的方法标签
ESTIMATOR_TAGS = ("scov", "scovt", "mle", "exp", "ours-map", "ours-bayes")


@dataclass
class EstimatorOutput:
    """某个方法的估计结果：稠密 Σ̂ 或稀疏因子，外加拟合信息"""
    label: str
    sigma_hat: Optional[np.ndarray] = None
    factor: Optional[SparseICF] = None
    params: dict[str, Any] = field(default_factory=dict)
    runtime_s: float = 0.0
    notes: list[str] = field(default_factory=list)

    def dense(self) -> np.ndarray:
        if self.sigma_hat is not None:
            return self.sigma_hat
        if self.factor is None:
            raise InputError(f"estimator {self.label} produced no estimate")
        return dense_covariance(self.factor)


def _check_data(Y: np.ndarray, min_rows: int = 1) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.ndim != 2:
        raise InputError(f"data must be an N x n matrix, got shape {Y.shape}")
    if Y.shape[0] < min_rows:
        raise InsufficientReplicates(f"need at least {min_rows} replicates, got {Y.shape[0]}")
    return Y


def sample_cov(Y: np.ndarray, center: bool = False) -> np.ndarray:
    """Σ̂ = Y′Y/N（零均值模型，除数为 N）；center=True 时先减去各站点均值"""
    Y = _check_data(Y)
    if center:
        Y = Y - Y.mean(axis=0)
    S = Y.T @ Y / Y.shape[0]
    return (S + S.T) / 2.0


def standardize(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    逐站点标准化

    Returns:
        (Z, mean, sd)；标准差为零的站点只中心化不缩放
    """
    Y = _check_data(Y)
    mean = Y.mean(axis=0)
    sd = Y.std(axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    return (Y - mean) / scale, mean, sd


def scovt(
    Y: np.ndarray,
    locs: LocationSet,
    taper_range: float,
    nugget: Optional[float] = None,
) -> np.ndarray:
    """锥化样本协方差: sample_cov ∘ exp(−d/taper_range) + nugget·I，默认 nugget 1e−5"""
    nugget = get_settings().taper_nugget if nugget is None else nugget
    return taper(sample_cov(Y), locs, taper_range, nugget)


def mle_regression(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    m_ours: int,
    settings: Optional[Settings] = None,
) -> SparseICF:
    """
    逐列回归的极大似然因子（无先验收缩）

    第 k 列（0 起始有序下标）使用 m_k = min(m_ours, N−1, k) 个近邻；
    û = (X′X)⁺X′y，d̂ = ‖y − Xû‖²/N，d̂ 为 0 时截断到 mle_min_d 并给出警告
    """
    settings = settings or get_settings()
    Y = _check_data(Y, min_rows=2)
    if Y.shape[1] != geometry.n:
        raise InputError(f"data has {Y.shape[1]} sites but the geometry has {geometry.n}")
    Y_ord = Y[:, geometry.perm]
    N = Y.shape[0]
    m_cap = min(m_ours, N - 1, geometry.m_max)

    u_list, d = [], np.empty(geometry.n)
    clamped = []
    for k in range(geometry.n):
        g = geometry.neighbors[k][: min(m_cap, k)]
        y = Y_ord[:, k]
        if len(g):
            X = -Y_ord[:, g]
            u = pinv(X.T @ X, rtol=settings.pinv_rtol) @ (X.T @ y)
            resid = y - X @ u
        else:
            u = np.zeros(0)
            resid = y
        d_k = float(resid @ resid) / N
        if d_k < settings.mle_min_d:
            clamped.append(k)
            d_k = settings.mle_min_d
        u_list.append(u)
        d[k] = d_k

    if clamped:
        warnings.warn(
            f"MLE residual variance clamped to {settings.mle_min_d} for {len(clamped)} columns "
            f"(first ordered column {clamped[0]})",
            RuntimeWarning,
            stacklevel=2,
        )
    return assemble(geometry, u_list, d)


@dataclass
class ExponentialFit:
    """EXP 拟合结果 Σ̂ = v·exp(−d/ρ)"""
    variance: float
    range: float
    sigma_hat: np.ndarray
    neg_loglik: float
    bracket: tuple[float, float]
    notes: list[str] = field(default_factory=list)


def _profile(D: np.ndarray, S: np.ndarray, log_rho: float) -> tuple[float, float]:
    """
    剖面负对数似然（每个重复样本、去掉常数）: n·log v̂ + log|R|，v̂ = tr(R⁻¹S)/n
    R 不正定时返回 (inf, nan)
    """
    n = D.shape[0]
    R = np.exp(-D / math.exp(log_rho))
    try:
        cho = cho_factor(R, lower=True)
    except LinAlgError:
        return math.inf, math.nan
    v = float(np.trace(cho_solve(cho, S))) / n
    if not v > 0.0:
        return math.inf, math.nan
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    return n * math.log(v) + logdet, v


def exponential_fit(Y: np.ndarray, locs: LocationSet, max_shrink: int = 40) -> ExponentialFit:
    """
    指数协方差 v·exp(−d/ρ) 的极大似然拟合

    v 解析剖面化，对 log ρ 在 [log(d_min/10), log(10·d_max)] 上做有界一维搜索，
    最后与区间端点比较取最优。端点处 R 不正定时向内收缩区间并警告。
    """
    Y = _check_data(Y)
    if Y.shape[1] != locs.n:
        raise InputError(f"data has {Y.shape[1]} sites but there are {locs.n} locations")
    if locs.n < 2:
        raise InputError("exponential fit needs at least two locations")
    settings = get_settings()
    if locs.n > settings.dense_limit:
        raise DenseLimitExceeded(f"n={locs.n} exceeds the dense limit {settings.dense_limit}")

    S = sample_cov(Y)
    D = cdist(locs.coords, locs.coords)
    dists = pdist(locs.coords)
    dists = dists[dists > 0]
    if dists.size == 0:
        raise InputError("exponential fit needs at least two distinct locations")
    lo0, hi0 = math.log(dists.min() / 10.0), math.log(10.0 * dists.max())
    lo, hi = lo0, hi0

    # 大 ρ 时 R 接近全 1 矩阵，可能数值不正定
    for _ in range(max_shrink):
        if math.isfinite(_profile(D, S, hi)[0]):
            break
        hi -= (hi - lo) / 4.0
    for _ in range(max_shrink):
        if math.isfinite(_profile(D, S, lo)[0]):
            break
        lo += (hi - lo) / 4.0

    notes = []
    if (lo, hi) != (lo0, hi0):
        msg = f"exponential fit: bracket shrunk to ranges [{math.exp(lo):.4g}, {math.exp(hi):.4g}]"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    res = minimize_scalar(
        lambda t: _profile(D, S, t)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-6},
    )
    candidates = [(float(res.fun), float(res.x)), (_profile(D, S, lo)[0], lo), (_profile(D, S, hi)[0], hi)]
    best_f, best_t = min(candidates, key=lambda c: c[0])
    if not math.isfinite(best_f):
        raise InputError("exponential fit failed: correlation matrix not positive definite on the whole bracket")

    _, v = _profile(D, S, best_t)
    rho = math.exp(best_t)
    sigma = v * np.exp(-D / rho)
    log("EXP", f"variance={v:.4g} range={rho:.4g}")
    return ExponentialFit(
        variance=v,
        range=rho,
        sigma_hat=(sigma + sigma.T) / 2.0,
        neg_loglik=0.5 * Y.shape[0] * (best_f + locs.n * (1.0 + math.log(2.0 * math.pi))),
        bracket=(math.exp(lo), math.exp(hi)),
        notes=notes,
    )


def run_estimator(label: str, fn, *args, **kwargs) -> EstimatorOutput:
    """计时执行一个估计方法并包装为 EstimatorOutput"""
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    runtime = time.perf_counter() - start
    if isinstance(out, SparseICF):
        return EstimatorOutput(label=label, factor=out, runtime_s=runtime)
    if isinstance(out, ExponentialFit):
        return EstimatorOutput(
            label=label,
            sigma_hat=out.sigma_hat,
            params={"variance": out.variance, "range": out.range},
            runtime_s=runtime,
            notes=out.notes,
        )
    return EstimatorOutput(label=label, sigma_hat=np.asarray(out), runtime_s=runtime)
