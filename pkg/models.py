"""
数据模型定义
超参数、协方差模型、采样器配置、运行记录与结果摘要
"""
import math
from datetime import datetime
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, PositiveFloat, field_validator, model_validator


class Hyperparameters(BaseModel):
    """先验超参数 θ = (θ1, θ2, θ3)，序列化为线性尺度，推断在对数尺度上进行"""
    theta1: PositiveFloat  # 边际方差尺度
    theta2: PositiveFloat  # d_i 随序号衰减的速度
    theta3: PositiveFloat  # u_i 随近邻序号衰减的速度

    @field_validator("theta1", "theta2", "theta3")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("hyperparameters must be finite")
        return v

    def log_vector(self) -> np.ndarray:
        return np.log([self.theta1, self.theta2, self.theta3])

    @classmethod
    def from_log(cls, log_theta) -> "Hyperparameters":
        t1, t2, t3 = np.exp(np.asarray(log_theta, dtype=float))
        return cls(theta1=float(t1), theta2=float(t2), theta3=float(t3))

    def as_tuple(self) -> tuple[float, float, float]:
        return self.theta1, self.theta2, self.theta3


# ---------------------------------------------------------------------------
# 协方差模型（真值生成器）
# ---------------------------------------------------------------------------


class MaternModel(BaseModel):
    """Matérn: σ²·(2^{1−ν}/Γ(ν))(d/ρ)^ν K_ν(d/ρ)"""
    kind: Literal["matern"] = "matern"
    variance: PositiveFloat = 1.0
    range: PositiveFloat = 0.25
    smoothness: PositiveFloat = 1.0


class ExponentialModel(BaseModel):
    """指数协方差: θ1·exp(−θ2·d/2)"""
    kind: Literal["exponential"] = "exponential"
    theta1: PositiveFloat = 1.0
    theta2: PositiveFloat = 1.0


class CauchyModel(BaseModel):
    """广义 Cauchy: σ²(1 + (d/ρ)^α)^{−β/α}"""
    kind: Literal["cauchy"] = "cauchy"
    variance: PositiveFloat = 1.0
    range: PositiveFloat = 0.25
    alpha: float = Field(1.0, gt=0, le=2)
    beta: PositiveFloat = 0.5


class PaciorekModel(BaseModel):
    """非平稳各向异性 Matérn（核卷积形式），y 方向范围随 s_y 线性变化"""
    kind: Literal["paciorek"] = "paciorek"
    variance: PositiveFloat = 1.0
    smoothness: PositiveFloat = 1.0
    x_range: PositiveFloat = 0.05
    y_range_intercept: PositiveFloat = 0.05
    y_range_slope: float = Field(0.45, ge=0)


CovarianceModel = Annotated[
    Union[MaternModel, ExponentialModel, CauchyModel, PaciorekModel],
    Field(discriminator="kind"),
]


class Scenario(BaseModel):
    """benchmark 场景：真值协方差模型与站点布局"""
    model: CovarianceModel
    sites: str  # grid:ROWSxCOLS 或 random:N


# ---------------------------------------------------------------------------
# 采样器配置
# ---------------------------------------------------------------------------


class MHConfig(BaseModel):
    """自适应 Metropolis-Hastings 配置（对数 θ 尺度）"""
    n_iter: int = Field(20_000, ge=0)
    n_burn: int = Field(10_000, ge=0)
    thin: int = Field(1, ge=1)
    init_theta: Optional[Hyperparameters] = None
    adapt_start: int = Field(1000, ge=0)
    proposal_scale: PositiveFloat = 2.38 ** 2 / 3  # s_d
    regularizer: PositiveFloat = 1e-6  # ε
    initial_scale: PositiveFloat = 0.1  # 自适应开始前的球形提议标准差
    seed: int = 0

    @model_validator(mode="after")
    def _check_burn(self) -> "MHConfig":
        if self.n_burn > self.n_iter:
            raise ValueError("n_burn must not exceed n_iter")
        return self


class NoiseModel(BaseModel):
    """观测噪声: tau2 固定，或 tau2=None 时使用 IG(a0, b0) 超先验"""
    tau2: Optional[PositiveFloat] = None
    a0: PositiveFloat = 0.01
    b0: PositiveFloat = 0.01

    @property
    def unknown(self) -> bool:
        return self.tau2 is None


class GibbsConfig(BaseModel):
    """含噪数据 Gibbs 采样配置"""
    n_sweeps: int = Field(200, ge=1)
    n_burn: int = Field(50, ge=0)
    update_theta: bool = True
    inner_mh_steps: int = Field(5, ge=0)
    init_theta: Optional[Hyperparameters] = None
    init_tau2: Optional[PositiveFloat] = None
    mh: MHConfig = Field(default_factory=lambda: MHConfig(n_iter=0, n_burn=0, adapt_start=100))
    seed: int = 0

    @model_validator(mode="after")
    def _check_burn(self) -> "GibbsConfig":
        if self.n_burn >= self.n_sweeps:
            raise ValueError("n_burn must be smaller than n_sweeps")
        return self


# ---------------------------------------------------------------------------
# 运行记录与摘要
# ---------------------------------------------------------------------------


class RunConfig(BaseModel):
    """每次命令运行写出的 manifest"""
    command: str
    options: dict[str, Any]
    seed: int
    threads: int = 1
    out_dir: str
    version: str = "0.1.0"
    created_at: datetime


class ChainSummary(BaseModel):
    """MH 链摘要"""
    n_samples: int
    acceptance_rate: float
    ess: dict[str, float]
    posterior_mean: dict[str, float]
    quantiles: dict[str, dict[str, float]]  # theta_k -> {"q05":..., "q50":..., "q95":...}
    degenerate: bool = False


class FitSummary(BaseModel):
    """fit 命令摘要"""
    mode: Literal["eb", "bayes"]
    metric: Literal["euclid", "corr"]
    ordering: Literal["maximin", "coordinate"] = "maximin"
    n_sites: int
    n_replicates: int
    dimension: int
    m: int
    theta: Hyperparameters
    log_likelihood: float
    runtime_s: float
    chain: Optional[ChainSummary] = None


class GibbsSummary(BaseModel):
    """gibbs 命令摘要"""
    n_sweeps: int
    n_kept: int
    tau2_mean: Optional[float] = None
    tau2_quantiles: Optional[dict[str, float]] = None
    theta_mean: dict[str, float]
    runtime_s: float


class BenchmarkRecord(BaseModel):
    """benchmark 长表中的一行"""
    scenario: str
    estimator: str
    n_replicates: int
    seed: int
    metric: Literal["kl", "logscore"]
    value: float  # 奇异估计记为 inf
    singular: bool = False
    params: str = ""  # 参数化方法的拟合参数，如 "range=0.31;variance=4.9"
    runtime_s: float = 0.0
