"""
协方差矩阵生成
Matérn / 指数 / Cauchy / 非平稳各向异性 Matérn（Paciorek 核卷积形式）
"""
import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gamma, kv

from errors import InvalidModel, ModelEvaluationError
from geometry import LocationSet
from models import CauchyModel, CovarianceModel, ExponentialModel, MaternModel, PaciorekModel


def matern_correlation(d: np.ndarray, smoothness: float) -> np.ndarray:
    """
    单位范围的 Matérn 相关函数 M_ν(d) = (2^{1−ν}/Γ(ν)) d^ν K_ν(d)
    ν ∈ {0.5, 1.5, 2.5} 用闭式，其余用 scipy 的 K_ν
    """
    d = np.asarray(d, dtype=float)
    nu = float(smoothness)
    if nu == 0.5:
        return np.exp(-d)
    if nu == 1.5:
        s = np.sqrt(3.0) * d
        return (1.0 + s) * np.exp(-s)
    if nu == 2.5:
        s = np.sqrt(5.0) * d
        return (1.0 + s + s * s / 3.0) * np.exp(-s)

    out = np.ones_like(d)
    pos = d > 0
    x = d[pos]
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        val = (2.0 ** (1.0 - nu) / gamma(nu)) * x ** nu * kv(nu, x)
    # 大距离下 K_ν 下溢为 0，x^ν 有限，乘积记为 0
    out[pos] = np.where(np.isfinite(val), val, 0.0)
    return out


def _matern(model: MaternModel, D: np.ndarray) -> np.ndarray:
    return model.variance * matern_correlation(D / model.range, model.smoothness)


def _exponential(model: ExponentialModel, D: np.ndarray) -> np.ndarray:
    return model.theta1 * np.exp(-model.theta2 * D / 2.0)


def _cauchy(model: CauchyModel, D: np.ndarray) -> np.ndarray:
    return model.variance * (1.0 + (D / model.range) ** model.alpha) ** (-model.beta / model.alpha)


def _paciorek(model: PaciorekModel, coords: np.ndarray) -> np.ndarray:
    """
    对角局部核 Σ(s) = diag(r_x², r_y(s)²)，r_x 为常数，r_y(s) = a + b·s_y
    C(s,s') = σ² |Σ|^{1/4}|Σ'|^{1/4} |(Σ+Σ')/2|^{-1/2} M_ν(√Q)
    """
    if coords.shape[1] != 2:
        raise InvalidModel(f"paciorek model needs 2-D locations, got p={coords.shape[1]}")
    rx = np.full(coords.shape[0], model.x_range)
    ry = model.y_range_intercept + model.y_range_slope * coords[:, 1]
    if np.any(ry <= 0):
        raise InvalidModel("y-range must stay positive over the domain")

    sx = (rx[:, None] ** 2 + rx[None, :] ** 2) / 2.0
    sy = (ry[:, None] ** 2 + ry[None, :] ** 2) / 2.0
    dx = coords[:, None, 0] - coords[None, :, 0]
    dy = coords[:, None, 1] - coords[None, :, 1]
    q = dx * dx / sx + dy * dy / sy

    prefactor = np.sqrt(np.outer(rx * ry, rx * ry)) / np.sqrt(sx * sy)
    return model.variance * prefactor * matern_correlation(np.sqrt(q), model.smoothness)


def build_covariance(model: CovarianceModel, locs: LocationSet) -> np.ndarray:
    """
    按模型生成 n×n 协方差矩阵

    Raises:
        ModelEvaluationError: 出现非有限值
    """
    if isinstance(model, PaciorekModel):
        sigma = _paciorek(model, locs.coords)
    else:
        D = cdist(locs.coords, locs.coords)
        if isinstance(model, MaternModel):
            sigma = _matern(model, D)
        elif isinstance(model, ExponentialModel):
            sigma = _exponential(model, D)
        elif isinstance(model, CauchyModel):
            sigma = _cauchy(model, D)
        else:
            raise InvalidModel(f"unsupported covariance model: {type(model).__name__}")

    if not np.all(np.isfinite(sigma)):
        raise ModelEvaluationError(f"{model.kind} covariance has non-finite entries")
    return (sigma + sigma.T) / 2.0
