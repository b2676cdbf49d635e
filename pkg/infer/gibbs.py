"""
含噪观测的 Gibbs 采样
w^{(ℓ)} | y^{(ℓ)} ~ N(y^{(ℓ)}, τ²I)，在 θ、(U, D)、潜在场 Y 与 τ² 之间交替抽样
"""
import math
import time
from dataclasses import dataclass
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu
from scipy.stats import invgamma

from assembly import SparseICF, precision_matrix
from config import log
from errors import GibbsFactorError, PosteriorFactorizationError
from geometry import OrderedGeometry
from models import GibbsConfig, GibbsSummary, Hyperparameters, NoiseModel
from .diagnostics import SUMMARY_QUANTILES, THETA_NAMES
from .fitting import draw_factor
from .mh import AdaptiveMetropolis, default_init, log_posterior


def draw_latent_fields(
    W_ordered: np.ndarray,
    icf: SparseICF,
    tau2: float,
    rng: np.random.Generator,
    sweep: int = -1,
) -> np.ndarray:
    """
    y^{(ℓ)} ~ N(Q⁻¹w^{(ℓ)}/τ², Q⁻¹)，Q = U D⁻¹ U′ + τ⁻²I（有序下标）

    先扰动后求解: y = Q⁻¹(w/τ² + U D^{−1/2} z₁ + τ⁻¹ z₂)，Q 只做一次稀疏 LU 分解
    """
    W_ordered = np.atleast_2d(np.asarray(W_ordered, dtype=float))
    N, n = W_ordered.shape
    U = sp.csc_matrix(icf.U)
    Q = precision_matrix(icf, ordered=True) + sp.identity(n, format="csr") / tau2
    try:
        lu = splu(sp.csc_matrix(Q))
    except RuntimeError as e:
        raise GibbsFactorError(sweep, str(e)) from e

    z1 = rng.standard_normal((n, N))
    z2 = rng.standard_normal((n, N))
    rhs = W_ordered.T / tau2 + U @ (z1 / np.sqrt(icf.d)[:, None]) + z2 / math.sqrt(tau2)
    Y = lu.solve(rhs)
    if not np.all(np.isfinite(Y)):
        raise GibbsFactorError(sweep, "latent draw is not finite")
    return Y.T


@dataclass
class GibbsResult:
    """保留的（燃烧期之后）Gibbs 样本"""
    theta_chain: np.ndarray  # (k, 3) 线性尺度
    tau2_chain: np.ndarray  # (k,)
    latent_mean: np.ndarray  # (N, n)，原始站点顺序
    latent_last: np.ndarray  # (N, n)，原始站点顺序
    n_sweeps: int
    theta_acceptance_rate: float
    runtime_s: float

    @property
    def n_kept(self) -> int:
        return len(self.tau2_chain)

    def summary(self, noise: NoiseModel) -> GibbsSummary:
        tau2_q = None
        tau2_mean = None
        if noise.unknown and self.n_kept:
            tau2_mean = float(self.tau2_chain.mean())
            tau2_q = {label: float(np.quantile(self.tau2_chain, q)) for label, q in SUMMARY_QUANTILES.items()}
        return GibbsSummary(
            n_sweeps=self.n_sweeps,
            n_kept=self.n_kept,
            tau2_mean=tau2_mean,
            tau2_quantiles=tau2_q,
            theta_mean={name: float(self.theta_chain[:, j].mean()) for j, name in enumerate(THETA_NAMES)},
            runtime_s=self.runtime_s,
        )


def gibbs_noisy(
    W: np.ndarray,
    geometry: OrderedGeometry,
    noise: NoiseModel,
    config: GibbsConfig,
    threads: int = 1,
) -> GibbsResult:
    """
    每轮扫描:
      1. update_theta 时，以当前潜在场为数据做 inner_mh_steps 步自适应 MH 更新 θ
      2. 从 p(U, D | Y, θ) 抽取因子
      3. 抽取潜在场 Y
      4. τ² 未知时 τ² ~ IG(a0 + nN/2, b0 + Σ‖w − y‖²/2)

    Args:
        W: (N, n) 原始站点顺序的含噪数据
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    W_ord = W[:, geometry.perm]
    N, n = W_ord.shape
    seed = config.seed

    theta = config.init_theta or default_init(W)
    if noise.unknown:
        tau2 = config.init_tau2 or max(0.1 * float(np.mean(np.square(W))), 1e-8)
    else:
        tau2 = float(noise.tau2)
    Y_ord = W_ord.copy()

    sampler = None
    if config.update_theta:
        sampler = AdaptiveMetropolis(
            lambda x: log_posterior(x, Y_ord, geometry, threads),
            theta.log_vector(),
            config.mh,
            np.random.default_rng([seed, 0]),
        )

    thetas, tau2s = [], []
    latent_sum = np.zeros_like(W_ord)
    report_every = max(config.n_sweeps // 10, 1)
    start = time.perf_counter()

    for sweep in range(config.n_sweeps):
        if sampler is not None:
            current = Y_ord
            sampler.retarget(lambda x: log_posterior(x, current, geometry, threads))
            for _ in range(config.inner_mh_steps):
                sampler.step()
            theta = Hyperparameters.from_log(sampler.x)

        try:
            icf = draw_factor(Y_ord, geometry, theta, (seed, 1, sweep), threads=threads)
        except PosteriorFactorizationError as e:
            raise GibbsFactorError(sweep, str(e)) from e

        Y_ord = draw_latent_fields(W_ord, icf, tau2, np.random.default_rng([seed, 2, sweep]), sweep=sweep)

        if noise.unknown:
            resid = float(np.sum(np.square(W_ord - Y_ord)))
            tau2 = float(invgamma.rvs(
                noise.a0 + n * N / 2.0,
                scale=noise.b0 + resid / 2.0,
                random_state=np.random.default_rng([seed, 3, sweep]),
            ))

        if sweep >= config.n_burn:
            thetas.append(theta.as_tuple())
            tau2s.append(tau2)
            latent_sum += Y_ord

        if (sweep + 1) % report_every == 0:
            log("Gibbs", f"sweep {sweep + 1}/{config.n_sweeps} tau2={tau2:.4g} theta1={theta.theta1:.4g}")

    n_kept = len(tau2s)
    inv = geometry.inv_perm
    return GibbsResult(
        theta_chain=np.array(thetas).reshape(-1, 3),
        tau2_chain=np.array(tau2s),
        latent_mean=(latent_sum / max(n_kept, 1))[:, inv],
        latent_last=Y_ord[:, inv],
        n_sweeps=config.n_sweeps,
        theta_acceptance_rate=sampler.acceptance_rate if sampler is not None else 0.0,
        runtime_s=time.perf_counter() - start,
    )
