"""
基准估计方法测试：SCOV、SCOVT、MLE、EXP
"""
import math
import os
import sys
import warnings

import numpy as np
import pytest
from scipy.spatial.distance import cdist

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from assembly import dense_covariance, off_diagonal_triplets
from baselines import exponential_fit, mle_regression, run_estimator, sample_cov, scovt, standardize
from baselines.estimators import _profile
from config import get_settings
from covgen import build_covariance, random_locations, simulate_replicates
from errors import DenseLimitExceeded, InsufficientReplicates
from geometry import LocationSet, OrderedGeometry, build_geometry
from models import ExponentialModel, MaternModel
from prior import ColumnPrior
from regress import extract_regression, nig_posterior


def _chain_geometry(n: int) -> OrderedGeometry:
    """恒等排序，g(i) 为全部前序站点"""
    neighbors = tuple(np.arange(k, dtype=np.int64) for k in range(n))
    return OrderedGeometry(perm=np.arange(n), neighbors=neighbors, m_max=max(n - 1, 1), p=1)


def test_sample_cov():
    """外积、相同行与蒙特卡洛一致性"""
    # 1. N = 1
    assert sample_cov(np.array([[1.0, -1.0]])).tolist() == [[1.0, -1.0], [-1.0, 1.0]]

    # 2. 相同行
    r = np.array([0.5, 2.0, -1.0])
    assert np.allclose(sample_cov(np.tile(r, (7, 1))), np.outer(r, r))

    # 3. 大样本
    locs = random_locations(5, seed=0)
    sigma = build_covariance(MaternModel(variance=1.0, range=0.3, smoothness=1.0), locs)
    S = sample_cov(simulate_replicates(sigma, 100_000, seed=1))
    assert np.max(np.abs(S - sigma)) < 0.02
    assert np.linalg.eigvalsh(S).min() >= -1e-10

    # 4. 中心化
    Y = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(sample_cov(Y, center=True), [[1.0, 1.0], [1.0, 1.0]])


def test_standardize():
    """逐站点零均值单位方差；零方差站点只中心化"""
    Y = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
    Z, mean, sd = standardize(Y)
    assert np.allclose(Z[:, 0].mean(), 0.0) and np.allclose(Z[:, 0].std(), 1.0)
    assert np.all(Z[:, 1] == 0.0)
    assert mean.tolist() == [3.0, 5.0] and sd[1] == 0.0


def test_scovt_hand_case():
    """三个站点的手算锥化"""
    Y = np.array([[1.0, 2.0, 0.0], [1.0, 0.0, 2.0]])
    locs = LocationSet(np.array([0.0, 1.0, 3.0]))
    S = np.array([[1.0, 1.0, 1.0], [1.0, 2.0, 0.0], [1.0, 0.0, 2.0]])
    D = np.abs(np.subtract.outer([0.0, 1.0, 3.0], [0.0, 1.0, 3.0]))
    expected = S * np.exp(-D / 2.0) + 1e-5 * np.eye(3)

    out = scovt(Y, locs, taper_range=2.0)
    assert np.allclose(out, expected, atol=1e-15)
    # 块金只加在对角线
    off = ~np.eye(3, dtype=bool)
    assert np.allclose(out[off], (S * np.exp(-D / 2.0))[off])
    # 无穷范围且无块金
    assert np.allclose(scovt(Y, locs, 1e12, nugget=0.0), sample_cov(Y), atol=1e-9)


def test_mle_orthogonal_design():
    """正交设计下 û 为逐列投影"""
    y0 = np.array([1.0, -1.0, 1.0, -1.0])
    y1 = np.array([1.0, 1.0, -1.0, -1.0])
    y2 = np.array([3.0, 1.0, 2.0, 0.0])
    Y = np.column_stack([y0, y1, y2])
    icf = mle_regression(Y, _chain_geometry(3), m_ours=2)

    rows, cols, vals = off_diagonal_triplets(icf)
    entries = {(int(r), int(c)): float(v) for r, c, v in zip(rows, cols, vals)}
    # X = −Y_g，û_j = −(y_j′y2)/(y_j′y_j)
    assert entries[(0, 2)] == pytest.approx(-1.0)
    assert entries[(1, 2)] == pytest.approx(-0.5)
    assert entries.get((0, 1), 0.0) == pytest.approx(0.0, abs=1e-14)
    assert icf.d[0] == pytest.approx(1.0)
    assert icf.d[1] == pytest.approx(1.0)


def test_mle_zero_residual_clamped():
    """插值拟合时 d̂ 截断到下限并警告"""
    y0 = np.array([1.0, -2.0])
    Y = np.column_stack([y0, 2.0 * y0, np.array([0.3, 0.1])])
    with pytest.warns(RuntimeWarning, match="clamped"):
        icf = mle_regression(Y, _chain_geometry(3), m_ours=2)
    assert icf.d[1] == pytest.approx(1e-12)
    assert np.all(icf.d > 0)

    with pytest.raises(InsufficientReplicates):
        mle_regression(Y[:1], _chain_geometry(3), m_ours=2)


def test_mle_matches_flat_prior_limit():
    """先验方差趋于无穷时 NIG 后验均值等于 MLE 系数"""
    rng = np.random.default_rng(4)
    locs = LocationSet(rng.uniform(size=(30, 2)))
    geometry = build_geometry(locs, m_max=4)
    Y = rng.standard_normal((20, 30))
    icf = mle_regression(Y, geometry, m_ours=4)
    rows, cols, vals = off_diagonal_triplets(icf)

    Y_ord = Y[:, geometry.perm]
    for k in (5, 17, 29):
        g = geometry.neighbors[k]
        prior = ColumnPrior(alpha=1.0, beta=1.0, v=np.full(len(g), 1e12))
        post = nig_posterior(extract_regression(Y_ord, g, k), prior)
        mask = cols == k
        by_row = dict(zip(rows[mask].tolist(), vals[mask].tolist()))
        assert np.allclose([by_row[int(j)] for j in g], post.u_hat, atol=1e-6)


def test_mle_site_order():
    """大样本下 MLE 因子还原的协方差与真值在原始站点顺序上一致"""
    locs = random_locations(8, seed=6)
    sigma = build_covariance(MaternModel(variance=1.0, range=0.3, smoothness=0.5), locs)
    Y = simulate_replicates(sigma, 20_000, seed=2)
    geometry = build_geometry(locs, m_max=7)
    out = run_estimator("mle", mle_regression, Y, geometry, 7)
    assert out.label == "mle" and out.factor is not None
    assert np.max(np.abs(out.dense() - sigma)) < 0.1
    assert np.max(np.abs(dense_covariance(out.factor) - sigma)) < 0.1


def test_exponential_fit_profile():
    """剖面恒等式与端点比较"""
    locs = random_locations(40, seed=3)
    sigma = build_covariance(ExponentialModel(theta1=3.0, theta2=2.0 / 0.3), locs)
    Y = simulate_replicates(sigma, 30, seed=4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = exponential_fit(Y, locs)

    D = cdist(locs.coords, locs.coords)
    S = sample_cov(Y)

    def profile(rho):
        R = np.exp(-D / rho)
        v = np.trace(np.linalg.solve(R, S)) / locs.n
        return locs.n * math.log(v) + np.linalg.slogdet(R)[1], v

    _, v = profile(fit.range)
    assert fit.variance == pytest.approx(v, rel=1e-8)
    assert np.allclose(fit.sigma_hat, fit.variance * np.exp(-D / fit.range))
    at_optimum = _profile(D, S, math.log(fit.range))[0]
    for end in fit.bracket:
        assert at_optimum <= _profile(D, S, math.log(end))[0] + 1e-9

    out = run_estimator("exp", exponential_fit, Y, locs)
    assert set(out.params) == {"variance", "range"}


def test_exponential_fit_dense_limit(monkeypatch):
    """站点数超过稠密上限时拒绝"""
    locs = random_locations(4, seed=0)
    Y = np.random.default_rng(0).standard_normal((10, 4))
    monkeypatch.setattr(get_settings(), "dense_limit", 3)
    with pytest.raises(DenseLimitExceeded):
        exponential_fit(Y, locs)


@pytest.mark.slow
def test_exponential_fit_recovers_range():
    """指数协方差数据上 ρ̂ 在真值 25% 以内（5 个种子的中位数）"""
    ranges = []
    for seed in range(5):
        locs = random_locations(200, seed=seed)
        sigma = build_covariance(ExponentialModel(theta1=3.0, theta2=2.0 / 0.3), locs)
        Y = simulate_replicates(sigma, 100, seed=seed + 10)
        ranges.append(exponential_fit(Y, locs).range)
    assert abs(float(np.median(ranges)) - 0.3) < 0.075
