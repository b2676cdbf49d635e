"""
自适应 Metropolis-Hastings（对数 θ 尺度）

前 adapt_start 步使用固定的球形高斯提议；之后提议协方差为
s_d·(链的滑动协方差 + ε·I)。θ 在对数尺度上取平坦先验，提议对称，
接受率只依赖积分似然之差。
"""
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from pydantic import ValidationError

from config import log
from errors import InitializationError, NumericalError
from geometry import OrderedGeometry
from models import ChainSummary, Hyperparameters, MHConfig
from regress import integrated_log_likelihood
from .diagnostics import summarize_chain

LogTarget = Callable[[np.ndarray], float]


def log_acceptance_ratio(log_post_current: float, log_post_proposed: float) -> float:
    """对称提议下 log r = log p(θ′|Y) − log p(θ|Y)"""
    if log_post_proposed == -math.inf:
        return -math.inf
    return log_post_proposed - log_post_current


def log_posterior(log_theta: np.ndarray, Y_ordered: np.ndarray, geometry: OrderedGeometry, threads: int = 1) -> float:
    """对数 θ 处的未归一化对数后验；θ 越界或分解失败返回 −inf"""
    try:
        with np.errstate(all="ignore"):
            theta = Hyperparameters.from_log(log_theta)
            value = integrated_log_likelihood(Y_ordered, geometry, theta, threads=threads)
    except (ValidationError, NumericalError, OverflowError):
        return -math.inf
    return value if math.isfinite(value) else -math.inf


class RunningCovariance:
    """滑动均值与协方差（Welford 更新）"""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self._m2 = np.zeros((dim, dim))

    def update(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += np.outer(delta, x - self.mean)

    @property
    def cov(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self._m2)
        c = self._m2 / (self.count - 1)
        return (c + c.T) / 2.0


class AdaptiveMetropolis:
    """
    单链自适应 MH 采样器
    Gibbs 采样中的 θ 更新复用同一个实例，目标函数可通过 retarget 替换
    """

    def __init__(self, log_target: LogTarget, x0: np.ndarray, config: MHConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.x = np.asarray(x0, dtype=float).copy()
        self._target = log_target
        self.log_post = log_target(self.x)
        if not math.isfinite(self.log_post):
            raise InitializationError(f"log posterior is not finite at the initial θ = {np.exp(self.x).tolist()}")
        self._running = RunningCovariance(len(self.x))
        self._running.update(self.x)
        self.n_steps = 0
        self.n_accepted = 0

    def retarget(self, log_target: LogTarget) -> None:
        """替换目标函数（潜变量更新后），并重算当前点的对数后验"""
        self._target = log_target
        self.log_post = log_target(self.x)
        if not math.isfinite(self.log_post):
            raise InitializationError("log posterior became non-finite at the current θ")

    def proposal_cov(self) -> np.ndarray:
        dim = len(self.x)
        if self.n_steps < self.config.adapt_start or self._running.count < 2:
            return self.config.initial_scale ** 2 * np.eye(dim)
        return self.config.proposal_scale * (self._running.cov + self.config.regularizer * np.eye(dim))

    def step(self) -> bool:
        """一步 MH；返回是否接受"""
        L = np.linalg.cholesky(self.proposal_cov())
        proposal = self.x + L @ self.rng.standard_normal(len(self.x))
        log_u = math.log(self.rng.uniform())
        proposed_lp = self._target(proposal)
        accepted = log_u < log_acceptance_ratio(self.log_post, proposed_lp)
        if accepted:
            self.x = proposal
            self.log_post = proposed_lp
            self.n_accepted += 1
        self.n_steps += 1
        self._running.update(self.x)
        return accepted

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_steps if self.n_steps else 0.0


@dataclass
class MHResult:
    """燃烧期与抽稀之后保留的链"""
    log_chain: np.ndarray  # (k, 3) 对数 θ
    log_post: np.ndarray  # (k,)
    accepted: np.ndarray  # (k,) 该迭代是否接受了提议
    iterations: np.ndarray  # (k,) 迭代序号（0 起始）
    acceptance_rate: float
    n_iter: int
    runtime_s: float = 0.0
    summary: Optional[ChainSummary] = field(default=None)

    @property
    def theta_chain(self) -> np.ndarray:
        return np.exp(self.log_chain)

    def thetas(self) -> list[Hyperparameters]:
        return [Hyperparameters.from_log(row) for row in self.log_chain]

    def posterior_mean(self) -> Hyperparameters:
        """线性尺度上的后验均值"""
        t1, t2, t3 = self.theta_chain.mean(axis=0)
        return Hyperparameters(theta1=float(t1), theta2=float(t2), theta3=float(t3))


def default_init(Y: np.ndarray) -> Hyperparameters:
    """默认初值 θ = (样本边际方差, 1.0, 0.5)；零均值模型下边际方差取 mean(Y²)"""
    var = float(np.mean(np.square(Y))) if np.size(Y) else 1.0
    if not math.isfinite(var) or var <= 0.0:
        var = 1.0
    return Hyperparameters(theta1=var, theta2=1.0, theta3=0.5)


def adaptive_mh(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    config: MHConfig,
    threads: int = 1,
) -> MHResult:
    """
    全贝叶斯推断：θ 的自适应 MH 链

    Args:
        Y: (N, n) 原始站点顺序的数据
        config: 链长、燃烧期、抽稀、自适应参数与主种子
    Returns:
        MHResult；n_iter == n_burn 时链为空。全部拒绝时给出 RuntimeWarning
    """
    Y_ordered = np.asarray(Y, dtype=float)[:, geometry.perm]
    init = config.init_theta or default_init(Y)
    rng = np.random.default_rng(config.seed)

    def target(x: np.ndarray) -> float:
        return log_posterior(x, Y_ordered, geometry, threads)

    sampler = AdaptiveMetropolis(target, init.log_vector(), config, rng)

    kept_x, kept_lp, kept_acc, kept_it = [], [], [], []
    report_every = max(config.n_iter // 10, 1)
    start = time.perf_counter()
    for it in range(config.n_iter):
        accepted = sampler.step()
        if it >= config.n_burn and (it - config.n_burn) % config.thin == 0:
            kept_x.append(sampler.x.copy())
            kept_lp.append(sampler.log_post)
            kept_acc.append(accepted)
            kept_it.append(it)
        if (it + 1) % report_every == 0:
            log("MH", f"{it + 1}/{config.n_iter} accept={sampler.acceptance_rate:.2f}")
    runtime = time.perf_counter() - start

    if config.n_iter > 0 and sampler.n_accepted == 0:
        warnings.warn(
            f"adaptive MH rejected all {config.n_iter} proposals; the chain is degenerate",
            RuntimeWarning,
            stacklevel=2,
        )

    log_chain = np.array(kept_x).reshape(-1, 3)
    result = MHResult(
        log_chain=log_chain,
        log_post=np.array(kept_lp, dtype=float),
        accepted=np.array(kept_acc, dtype=bool),
        iterations=np.array(kept_it, dtype=np.int64),
        acceptance_rate=sampler.acceptance_rate,
        n_iter=config.n_iter,
        runtime_s=runtime,
    )
    result.summary = summarize_chain(result.theta_chain, result.acceptance_rate)
    return result
