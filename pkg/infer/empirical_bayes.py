"""
经验贝叶斯：在对数 θ 上最大化积分似然（Nelder-Mead 单纯形）
"""
import math
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from config import Settings, get_settings, log
from errors import InitializationError
from geometry import OrderedGeometry
from models import Hyperparameters
from .mh import default_init, log_posterior


def empirical_bayes(
    Y: np.ndarray,
    geometry: OrderedGeometry,
    init: Optional[Hyperparameters] = None,
    threads: int = 1,
    settings: Optional[Settings] = None,
) -> Hyperparameters:
    """
    θ̂ = argmax log p(Y | θ)

    单纯形收敛后从当前最优点重启 eb_restarts 次；返回值的目标函数不低于初值处。
    Y 为原始站点顺序的 (N, n) 数据。
    """
    settings = settings or get_settings()
    Y_ordered = np.asarray(Y, dtype=float)[:, geometry.perm]
    init = init or default_init(Y)

    def objective(x: np.ndarray) -> float:
        value = log_posterior(x, Y_ordered, geometry, threads)
        return -value if math.isfinite(value) else math.inf

    x0 = init.log_vector()
    f0 = objective(x0)
    if not math.isfinite(f0):
        raise InitializationError(f"integrated log-likelihood is not finite at θ = {init.as_tuple()}")
    log("EB", f"start θ={init.as_tuple()} loglik={-f0:.6g}")

    options = {"xatol": settings.eb_xatol, "fatol": settings.eb_fatol, "maxiter": settings.eb_maxiter}
    best_x, best_f = x0, f0
    for attempt in range(settings.eb_restarts + 1):
        res = minimize(objective, best_x, method="Nelder-Mead", options=options)
        if res.fun < best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
        log("EB", f"pass {attempt + 1}: iterations {res.nit} loglik={-best_f:.6g}")

    theta = Hyperparameters.from_log(best_x)
    log("EB", f"θ̂={theta.as_tuple()}")
    return theta
