"""
协方差生成、重复样本模拟与锥化测试
"""
import os
import sys

import numpy as np
import pytest
from scipy.linalg import cholesky
from scipy.spatial.distance import cdist

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from covgen import build_covariance, grid_locations, matern_correlation, random_locations, simulate_replicates, taper
from errors import InputError, InvalidModel, NotPositiveDefinite
from geometry import LocationSet
from models import CauchyModel, ExponentialModel, MaternModel, PaciorekModel


def test_matern_values():
    """闭式值与 ν = 0.5 恒等式"""
    # 1. ν = 1.5, ρ = 1, d = 1
    locs = LocationSet(np.array([0.0, 1.0]))
    sigma = build_covariance(MaternModel(variance=1.0, range=1.0, smoothness=1.5), locs)
    expected = (1.0 + np.sqrt(3.0)) * np.exp(-np.sqrt(3.0))
    assert abs(sigma[0, 1] - expected) < 1e-12
    assert abs(sigma[0, 1] - 0.48336) < 1e-5

    # 2. ν = 0.5 等于同尺度指数协方差
    locs = random_locations(30, seed=1)
    m = build_covariance(MaternModel(variance=2.0, range=0.3, smoothness=0.5), locs)
    e = build_covariance(ExponentialModel(theta1=2.0, theta2=2.0 / 0.3), locs)
    assert np.allclose(m, e, rtol=1e-12, atol=0)

    # 3. 一般 ν 的 Bessel 实现与闭式一致（ν 略偏离 1.5）
    d = np.linspace(1e-6, 20.0, 200)
    assert np.allclose(matern_correlation(d, 1.5 + 1e-9), matern_correlation(d, 1.5), atol=1e-7)
    assert matern_correlation(np.array([0.0]), 1.0)[0] == 1.0


@pytest.mark.parametrize(
    "model",
    [
        MaternModel(variance=5.0, range=0.25, smoothness=1.0),
        ExponentialModel(theta1=5.0, theta2=4.0),
        CauchyModel(variance=5.0, range=0.25, alpha=1.0, beta=0.5),
        PaciorekModel(variance=5.0),
    ],
)
def test_models_symmetric_positive_definite(model):
    """对称、对角为方差、Cholesky 可分解"""
    locs = grid_locations(8, 8)
    sigma = build_covariance(model, locs)

    # 1. 对称与对角
    assert np.max(np.abs(sigma - sigma.T)) < 1e-12
    assert np.allclose(np.diag(sigma), 5.0)

    # 2. 正定（必要时加 1e-10 的块金）
    cholesky(sigma + 1e-10 * np.eye(locs.n), lower=True)


def test_stationary_and_monotone():
    """平稳模型只依赖距离；Cauchy 随距离单调不增"""
    locs = grid_locations(5, 5)
    sigma = build_covariance(MaternModel(variance=1.0, range=0.25, smoothness=1.0), locs)

    # 1. 水平相邻与竖直相邻距离相同
    assert sigma[0, 1] == pytest.approx(sigma[0, 5], rel=1e-14)
    assert sigma[6, 7] == pytest.approx(sigma[12, 17], rel=1e-14)

    # 2. Cauchy 单调
    D = cdist(locs.coords, locs.coords)
    c = build_covariance(CauchyModel(), locs)
    order = np.argsort(D[0])
    assert np.all(np.diff(c[0, order]) <= 1e-15)


def test_paciorek_kernel():
    """非平稳核对称，范围随 y 增大"""
    locs = LocationSet(np.array([[0.1, 0.1], [0.1, 0.2], [0.1, 0.8], [0.1, 0.9]]))
    sigma = build_covariance(PaciorekModel(variance=1.0), locs)
    assert sigma[0, 1] == sigma[1, 0]
    # 同样的 y 间隔，y 越大局部范围越大，相关越强
    assert sigma[2, 3] > sigma[0, 1]

    # 只支持二维站点
    with pytest.raises(InvalidModel):
        build_covariance(PaciorekModel(), LocationSet(np.array([[0.0], [1.0]])))


def test_simulate_replicates():
    """协方差、确定性与形状"""
    sigma = np.eye(3)

    # 1. 蒙特卡洛检查
    N = 100_000
    Y = simulate_replicates(sigma, N, seed=42)
    assert Y.shape == (N, 3)
    assert np.max(np.abs(Y.T @ Y / N - sigma)) < 5.0 / np.sqrt(N)

    # 2. 同一种子结果相同
    assert np.array_equal(simulate_replicates(sigma, 5, seed=7), simulate_replicates(sigma, 5, seed=7))

    # 3. N = 1
    Y = simulate_replicates(sigma, 1, seed=0)
    assert Y.shape == (1, 3) and np.all(np.isfinite(Y))

    # 4. 错误
    with pytest.raises(NotPositiveDefinite):
        simulate_replicates(np.array([[1.0, 2.0], [2.0, 1.0]]), 3, seed=0)
    with pytest.raises(InputError):
        simulate_replicates(sigma, 0, seed=0)


def test_taper():
    """锥化的极限、对角与单点值"""
    locs = LocationSet(np.array([0.0, 0.5, 2.0]))
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    sigma = A @ A.T

    # 1. 无穷范围
    assert np.allclose(taper(sigma, locs, 1e12), sigma, atol=1e-9)

    # 2. 对角加块金
    out = taper(sigma, locs, 0.3, nugget=0.25)
    assert np.allclose(np.diag(out), np.diag(sigma) + 0.25)

    # 3. d = taper_range
    out = taper(np.ones((3, 3)), locs, 0.5)
    assert abs(out[0, 1] - np.exp(-1.0)) < 1e-15

    # 4. 非法范围
    with pytest.raises(InputError):
        taper(sigma, locs, 0.0)


def test_site_layouts():
    """网格含角点，随机站点可复现"""
    locs = grid_locations(2, 2)
    assert locs.coords.tolist() == [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    assert np.array_equal(random_locations(10, seed=3).coords, random_locations(10, seed=3).coords)
