"""
异常定义
输入类错误（退出码 2）与数值类错误（退出码 3）分开
"""
from typing import Optional


class SpatialCovError(Exception):
    """所有错误的基类"""


class InputError(SpatialCovError, ValueError):
    """输入数据或参数不合法"""


class NumericalError(SpatialCovError, ArithmeticError):
    """数值计算失败"""


class DuplicateLocation(InputError):
    """在当前度量下存在重合的站点"""


class InsufficientReplicates(InputError):
    """重复样本数不足"""


class TruncationError(InputError):
    """条件集截断长度超出 m_max"""


class GeometryMismatch(InputError):
    """数据与几何结构不匹配"""


class InvalidFactor(InputError):
    """稀疏因子结构不合法"""


class DenseLimitExceeded(InputError):
    """n 超过稠密矩阵运算上限"""


class InvalidModel(InputError):
    """协方差模型参数不合法"""


class ModelEvaluationError(NumericalError):
    """协方差矩阵出现非有限值"""


class NotPositiveDefinite(NumericalError):
    """矩阵不正定，Cholesky 分解失败"""


class SingularEstimate(NumericalError):
    """估计的协方差矩阵奇异（KL / log score 记为 inf）"""


class InitializationError(NumericalError):
    """优化初始点处目标函数非有限"""


class PosteriorFactorizationError(NumericalError):
    """某一列的后验矩阵分解失败"""

    def __init__(self, column: int, detail: Optional[str] = None):
        self.column = column
        msg = f"posterior factorization failed at ordered column {column}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class GibbsFactorError(NumericalError):
    """Gibbs 扫描中潜变量精度矩阵分解失败"""

    def __init__(self, sweep: int, detail: Optional[str] = None):
        self.sweep = sweep
        msg = f"latent precision factorization failed at sweep {sweep}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
