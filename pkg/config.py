"""
配置加载模块
默认值 + 环境变量（SPATIALCOV_ 前缀）+ .env 文件，另支持 key=value 运行配置文件和 JSON manifest
"""
import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    """全局数值与运行配置"""

    model_config = SettingsConfigDict(
        env_prefix="SPATIALCOV_",
        env_file=".env",
        extra="ignore",
    )

    # 几何与稠密运算上限
    m_max: int = Field(50, ge=1)
    dense_limit: int = Field(10_000, ge=1)
    threads: int = Field(1, ge=1)

    # 经验贝叶斯优化
    eb_xatol: float = Field(1e-6, gt=0)
    eb_fatol: float = Field(1e-6, gt=0)
    eb_maxiter: int = Field(500, ge=1)
    eb_restarts: int = Field(1, ge=0)

    # 自适应 MH
    mh_initial_scale: float = Field(0.1, gt=0)
    mh_adapt_start: int = Field(1000, ge=0)
    mh_regularizer: float = Field(1e-6, gt=0)

    # 噪声模型 τ² 的 IG 超先验
    tau2_a0: float = Field(0.01, gt=0)
    tau2_b0: float = Field(0.01, gt=0)
    gibbs_inner_mh_steps: int = Field(5, ge=0)

    # 基线方法
    taper_nugget: float = Field(1e-5, ge=0)
    pinv_rtol: float = Field(1e-10, gt=0)
    mle_min_d: float = Field(1e-12, gt=0)

    # 评估
    kl_halve: bool = False
    map_convention: Literal["marginal", "joint"] = "marginal"

    verbose: bool = True


@lru_cache
def get_settings() -> Settings:
    """获取全局配置（缓存）"""
    return Settings()


def log(tag: str, message: str, settings: Optional[Settings] = None) -> None:
    """带组件标签的进度输出"""
    if (settings or get_settings()).verbose:
        print(f"[{tag}] {message}")


def load_run_config(path: str | Path) -> dict[str, Any]:
    """
    读取运行配置文件

    支持两种格式:
      - key=value 文本（与 .env 相同的语法）
      - 命令写出的 manifest.json（取其中的 options 字段）

    Returns:
        扁平的选项字典，键名与命令行参数名一致（下划线形式）
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")

    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        options = data.get("options", data)
        return {str(k).replace("-", "_"): v for k, v in options.items()}

    values = dotenv_values(path)
    return {
        str(k).strip().lower().replace("-", "_"): v
        for k, v in values.items()
        if v is not None
    }
