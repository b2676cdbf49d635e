"""
MCMC 链诊断：自相关、有效样本量、链摘要
"""
import numpy as np

from models import ChainSummary

THETA_NAMES = ("theta1", "theta2", "theta3")
SUMMARY_QUANTILES = {"q05": 0.05, "q50": 0.5, "q95": 0.95}


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """一维序列的样本自相关（FFT），rho[0] = 1"""
    x = np.asarray(x, dtype=float)
    n = len(x)
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    if acov[0] <= 0.0:
        return np.ones(1)
    return acov / acov[0]


def effective_sample_size(x: np.ndarray) -> float:
    """
    初始正序列估计: τ = −1 + 2 Σ_k (ρ_{2k} + ρ_{2k+1})，求和到第一个非正的配对为止
    常数链返回 1
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        return float(n)
    rho = autocorrelation(x)
    if len(rho) == 1:
        return 1.0
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0.0:
            break
        tau += 2.0 * pair
    return float(min(n / max(tau, 1e-12), n))


def summarize_chain(theta_chain: np.ndarray, acceptance_rate: float) -> ChainSummary:
    """
    Args:
        theta_chain: (k, 3) 线性尺度的 θ 样本
        acceptance_rate: 全部迭代上的接受率
    """
    theta_chain = np.atleast_2d(np.asarray(theta_chain, dtype=float))
    k = theta_chain.shape[0] if theta_chain.size else 0
    ess, mean, quantiles = {}, {}, {}
    for j, name in enumerate(THETA_NAMES):
        col = theta_chain[:, j] if k else np.zeros(0)
        ess[name] = effective_sample_size(np.log(col)) if k else 0.0
        mean[name] = float(col.mean()) if k else float("nan")
        quantiles[name] = {
            label: float(np.quantile(col, q)) if k else float("nan")
            for label, q in SUMMARY_QUANTILES.items()
        }
    return ChainSummary(
        n_samples=k,
        acceptance_rate=float(acceptance_rate),
        ess=ess,
        posterior_mean=mean,
        quantiles=quantiles,
        degenerate=acceptance_rate == 0.0,
    )
