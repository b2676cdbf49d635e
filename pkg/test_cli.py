"""
命令行测试：simulate / order / fit / sample / benchmark / gibbs
"""
import json
import math
import os
import sys

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from main import cli


def _invoke(*args: str):
    return CliRunner().invoke(cli, ["--quiet", *args])


@pytest.fixture
def simulated(tmp_path):
    """6×6 网格、N = 30 的模拟数据"""
    out = tmp_path / "sim"
    result = _invoke("simulate", "--sites", "grid:6x6", "-N", "30", "--seed", "3", "--tau2", "0.1", "--out-dir", str(out))
    assert result.exit_code == 0, result.output
    return out


def test_simulate_outputs(tmp_path):
    """网格角点、对称真值与 manifest"""
    out = tmp_path / "a"
    result = _invoke("simulate", "--sites", "grid:2x2", "-N", "5", "--seed", "1", "--out-dir", str(out))
    assert result.exit_code == 0, result.output

    # 1. 站点为单位正方形的四个角
    locs = pd.read_csv(out / "locations.csv")
    assert list(locs.columns) == ["x", "y"]
    assert locs.to_numpy().tolist() == [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]

    # 2. Σ 对称，Y 为 N×n
    sigma = pd.read_csv(out / "sigma_true.csv").to_numpy()
    assert np.allclose(sigma, sigma.T)
    assert pd.read_csv(out / "Y.csv").shape == (5, 4)
    assert not (out / "W.csv").exists(), "tau2 = 0 时不应写出 W.csv"

    # 3. manifest 记录解析后的参数
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 1
    assert manifest["options"]["sites"] == "grid:2x2"


def test_simulate_is_reproducible(tmp_path):
    """同一种子输出逐字节相同"""
    for name in ("a", "b"):
        result = _invoke("simulate", "--sites", "random:15", "-N", "4", "--seed", "9", "--out-dir", str(tmp_path / name))
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "Y.csv").read_bytes() == (tmp_path / "b" / "Y.csv").read_bytes()


def test_exit_codes(tmp_path):
    """输入错误退出码 2，数值错误退出码 3"""
    # 1. 站点格式不合法
    result = _invoke("simulate", "--sites", "hexagon:3", "--out-dir", str(tmp_path))
    assert result.exit_code == 2, result.output

    # 2. 模型参数不合法（Cauchy α > 2）
    result = _invoke("simulate", "--model", "cauchy", "--alpha", "3", "--sites", "grid:2x2", "--out-dir", str(tmp_path))
    assert result.exit_code == 2, result.output

    # 3. 负块金使 Σ 不正定
    result = _invoke("simulate", "--sites", "grid:3x3", "--jitter", "-10", "--out-dir", str(tmp_path / "npd"))
    assert result.exit_code == 3, result.output
    assert "Numerical error" in result.output


def test_order(simulated, tmp_path):
    """ordering.csv 为置换，条件集下标在前"""
    out = tmp_path / "ord"
    result = _invoke("order", "--locations", str(simulated / "locations.csv"), "--m-max", "4", "--out-dir", str(out))
    assert result.exit_code == 0, result.output

    df = pd.read_csv(out / "ordering.csv", keep_default_na=False, dtype={"neighbors": str})
    assert sorted(df["original_index"].tolist()) == list(range(36))
    for i, s in enumerate(df["neighbors"]):
        g = [int(t) for t in s.split(";")] if s else []
        assert len(g) <= 4 and all(j < i for j in g)


def test_fit_eb_then_sample(simulated, tmp_path):
    """eb 拟合写出因子与摘要；map 模式抽样"""
    fit_dir = tmp_path / "fit"
    result = _invoke(
        "fit", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
        "--m-max", "6", "--write-sigma", "--out-dir", str(fit_dir),
    )
    assert result.exit_code == 0, result.output

    # 1. 摘要
    summary = json.loads((fit_dir / "summary.json").read_text(encoding="utf-8"))
    assert summary["mode"] == "eb"
    assert summary["n_sites"] == 36 and summary["n_replicates"] == 30
    assert all(summary["theta"][k] > 0 for k in ("theta1", "theta2", "theta3"))
    assert math.isfinite(summary["log_likelihood"])
    for name in ("factor_u.csv", "factor_d.csv", "ordering.csv", "sigma_hat.csv", "manifest.json"):
        assert (fit_dir / name).exists(), f"缺少 {name}"
    sigma_hat = pd.read_csv(fit_dir / "sigma_hat.csv").to_numpy()
    assert np.allclose(sigma_hat, sigma_hat.T, atol=1e-10)

    # 2. map 抽样
    out = tmp_path / "samples"
    result = _invoke("sample", "--fit-dir", str(fit_dir), "--count", "7", "--seed", "2", "--out-dir", str(out))
    assert result.exit_code == 0, result.output
    assert pd.read_csv(out / "samples.csv").shape == (7, 36)

    # 3. count = 0 只写表头
    out = tmp_path / "empty"
    result = _invoke("sample", "--fit-dir", str(fit_dir), "--count", "0", "--out-dir", str(out))
    assert result.exit_code == 0, result.output
    assert pd.read_csv(out / "samples.csv").shape == (0, 36)

    # 4. bayes 模式需要链文件
    result = _invoke("sample", "--fit-dir", str(fit_dir), "--mode", "bayes", "--data", str(simulated / "Y.csv"),
                     "--out-dir", str(tmp_path / "nochain"))
    assert result.exit_code == 2, result.output


def test_fit_bayes_then_sample(simulated, tmp_path):
    """短链 bayes 拟合写出 chain.csv，bayes 模式抽样"""
    fit_dir = tmp_path / "fit"
    result = _invoke(
        "fit", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
        "--mode", "bayes", "--n-iter", "40", "--n-burn", "20", "--thin", "2", "--m-max", "4",
        "--out-dir", str(fit_dir),
    )
    assert result.exit_code == 0, result.output
    chain = pd.read_csv(fit_dir / "chain.csv")
    assert len(chain) == 10
    assert {"theta1", "theta2", "theta3"} <= set(chain.columns)

    out = tmp_path / "samples"
    result = _invoke("sample", "--fit-dir", str(fit_dir), "--mode", "bayes", "--data", str(simulated / "Y.csv"),
                     "--count", "3", "--out-dir", str(out))
    assert result.exit_code == 0, result.output
    samples = pd.read_csv(out / "samples.csv").to_numpy()
    assert samples.shape == (3, 36) and np.all(np.isfinite(samples))


def test_fit_rejects_bad_input(simulated, tmp_path):
    """数据列数与站点数不一致；burn-in 不小于迭代数"""
    Y = pd.read_csv(simulated / "Y.csv").iloc[:, :35]
    bad = tmp_path / "Y35.csv"
    Y.to_csv(bad, index=False)
    result = _invoke("fit", "--data", str(bad), "--locations", str(simulated / "locations.csv"), "--out-dir", str(tmp_path))
    assert result.exit_code == 2, result.output

    result = _invoke(
        "fit", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
        "--mode", "bayes", "--n-iter", "10", "--n-burn", "10", "--out-dir", str(tmp_path),
    )
    assert result.exit_code == 2, result.output


def test_benchmark_kl(tmp_path):
    """KL 长表：每个 (方法, N, 种子) 一行，非奇异的值有限且非负"""
    out = tmp_path / "bench"
    result = _invoke(
        "benchmark", "--scenario", "matern-random", "--sites", "random:25", "--estimator", "scovt", "--estimator", "mle", "--estimator", "ours-map",
        "-N", "20", "--n-seeds", "2", "--m-max", "5", "--threads", "2", "--out-dir", str(out),
    )
    assert result.exit_code == 0, result.output

    table = pd.read_csv(out / "kl_table.csv")
    assert len(table) == 6
    assert set(table["estimator"]) == {"scovt", "mle", "ours-map"}
    assert set(table["seed"]) == {0, 1}
    assert (table["metric"] == "kl").all()
    ok = table[~table["singular"]]
    assert np.all(np.isfinite(ok["value"])) and np.all(ok["value"] >= -1e-8)
    # 不记录耗时时表格可复现
    assert (table["runtime_s"] == 0.0).all()
    # 参数化方法写出拟合参数
    ours = table[table["estimator"] == "ours-map"]
    assert ours["params"].str.contains("theta1=").all()
    assert table[table["estimator"] == "scovt"]["params"].isna().all(), "非参数方法没有拟合参数"


def test_benchmark_log_score(simulated, tmp_path):
    """给出 --data 时写出 log score 表"""
    out = tmp_path / "ls"
    result = _invoke(
        "benchmark", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
        "--estimator", "scovt", "--estimator", "exp", "-N", "15", "--test-size", "5", "--splits", "2",
        "--out-dir", str(out),
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out / "logscore_table.csv")
    assert len(table) == 4
    assert (table["scenario"] == "Y").all()
    assert (table["metric"] == "logscore").all()

    # 训练 + 留出超过数据行数
    result = _invoke(
        "benchmark", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
        "-N", "28", "--test-size", "5", "--out-dir", str(out),
    )
    assert result.exit_code == 2, result.output


def test_gibbs(simulated, tmp_path):
    """短 Gibbs 运行写出链、潜变量均值与摘要"""
    out = tmp_path / "gibbs"
    result = _invoke(
        "gibbs", "--data", str(simulated / "W.csv"), "--locations", str(simulated / "locations.csv"),
        "--n-sweeps", "6", "--n-burn", "2", "--inner-mh-steps", "2", "--m-max", "4", "--out-dir", str(out),
    )
    assert result.exit_code == 0, result.output

    chain = pd.read_csv(out / "gibbs_chain.csv")
    assert list(chain.columns) == ["sweep", "theta1", "theta2", "theta3", "tau2"]
    assert chain["sweep"].tolist() == [2, 3, 4, 5]
    assert (chain["tau2"] > 0).all()
    assert pd.read_csv(out / "latent_mean.csv").shape[1] == 36
    assert (out / "summary.json").exists()

    # 固定 τ² 时链上 τ² 不变
    out = tmp_path / "fixed"
    result = _invoke(
        "gibbs", "--data", str(simulated / "W.csv"), "--locations", str(simulated / "locations.csv"),
        "--tau2", "0.1", "--n-sweeps", "3", "--n-burn", "0", "--no-theta-update", "--m-max", "4", "--out-dir", str(out),
    )
    assert result.exit_code == 0, result.output
    assert np.allclose(pd.read_csv(out / "gibbs_chain.csv")["tau2"], 0.1)


def test_benchmark_scenarios():
    """场景方差统一为 5，各自带站点布局；--sites 覆盖布局"""
    from cli.benchmark import SCENARIOS, scenario_sites

    assert list(SCENARIOS) == ["matern-grid", "cauchy", "paciorek", "matern-random"]
    for name, scenario in SCENARIOS.items():
        assert scenario.model.variance == 5.0, f"{name} 方差应为 5"

    # 1. 模型参数
    assert SCENARIOS["matern-grid"].model.range == 0.5 and SCENARIOS["matern-grid"].model.smoothness == 1.0
    assert SCENARIOS["matern-random"].model.range == 0.25 and SCENARIOS["matern-random"].model.smoothness == 1.0
    cauchy = SCENARIOS["cauchy"].model
    assert (cauchy.range, cauchy.alpha, cauchy.beta) == (0.25, 1.0, 0.5)
    assert SCENARIOS["paciorek"].model.kind == "paciorek"

    # 2. 布局：三个 50×50 网格与 2500 个随机站点
    for name in ("matern-grid", "cauchy", "paciorek"):
        assert SCENARIOS[name].sites == "grid:50x50"
        assert scenario_sites(name, None, 0).n == 2500
    random_sites = scenario_sites("matern-random", None, 0)
    assert random_sites.n == 2500
    assert np.all((random_sites.coords >= 0.0) & (random_sites.coords <= 1.0))

    # 3. 覆盖
    assert scenario_sites("paciorek", "grid:4x4", 0).n == 16


def test_benchmark_is_reproducible(tmp_path):
    """不记录耗时时，同一参数重跑的 KL 表逐字节相同"""
    args = (
        "benchmark", "--scenario", "cauchy", "--sites", "random:20", "--estimator", "scov",
        "--estimator", "exp", "--estimator", "ours-map", "-N", "15", "--n-seeds", "2", "--m-max", "4",
        "--threads", "2",
    )
    for name in ("a", "b"):
        result = _invoke(*args, "--out-dir", str(tmp_path / name))
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "kl_table.csv").read_bytes() == (tmp_path / "b" / "kl_table.csv").read_bytes()


def test_rerun_from_manifest(tmp_path):
    """以 manifest.json 作为 --config 重跑得到相同输出"""
    first = tmp_path / "first"
    result = _invoke("simulate", "--model", "cauchy", "--sites", "random:12", "-N", "4", "--seed", "5",
                     "--out-dir", str(first))
    assert result.exit_code == 0, result.output

    again = tmp_path / "again"
    result = _invoke("simulate", "--config", str(first / "manifest.json"), "--out-dir", str(again))
    assert result.exit_code == 0, result.output
    for name in ("locations.csv", "sigma_true.csv", "Y.csv"):
        assert (first / name).read_bytes() == (again / name).read_bytes(), f"{name} 不一致"

    manifest = json.loads((again / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["options"]["kind"] == "cauchy"
    assert manifest["seed"] == 5


def test_fit_corr_metric(simulated, tmp_path):
    """corr 度量（数据构造的先验相关）拟合"""
    fit_dir = tmp_path / "fit"
    result = _invoke(
        "fit", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
        "--metric", "corr", "--m-max", "5", "--out-dir", str(fit_dir),
    )
    assert result.exit_code == 0, result.output

    summary = json.loads((fit_dir / "summary.json").read_text(encoding="utf-8"))
    assert summary["metric"] == "corr"
    assert 1 <= summary["m"] <= 5
    assert math.isfinite(summary["log_likelihood"])
    df = pd.read_csv(fit_dir / "ordering.csv", keep_default_na=False, dtype={"neighbors": str})
    assert sorted(df["original_index"].tolist()) == list(range(36))


def test_fit_bayes_is_reproducible(simulated, tmp_path):
    """同一种子的 bayes 拟合写出相同的 chain.csv"""
    for name in ("a", "b"):
        result = _invoke(
            "fit", "--data", str(simulated / "Y.csv"), "--locations", str(simulated / "locations.csv"),
            "--mode", "bayes", "--n-iter", "30", "--n-burn", "10", "--m-max", "4", "--seed", "7",
            "--out-dir", str(tmp_path / name),
        )
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "chain.csv").read_bytes() == (tmp_path / "b" / "chain.csv").read_bytes()


def test_sample_bayes_follows_fit_standardize(simulated, tmp_path):
    """fit 用了 --standardize 时，bayes 抽样同样标准化数据"""
    # 1. 数据放大 100 倍
    Y = pd.read_csv(simulated / "Y.csv") * 100.0
    scaled = tmp_path / "Y100.csv"
    Y.to_csv(scaled, index=False)

    fit_dir = tmp_path / "fit"
    result = _invoke(
        "fit", "--data", str(scaled), "--locations", str(simulated / "locations.csv"), "--standardize",
        "--mode", "bayes", "--n-iter", "30", "--n-burn", "10", "--m-max", "4", "--out-dir", str(fit_dir),
    )
    assert result.exit_code == 0, result.output
    manifest = json.loads((fit_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["options"]["standardize"] is True

    # 2. 抽样在标准化尺度上
    out = tmp_path / "samples"
    result = _invoke("sample", "--fit-dir", str(fit_dir), "--mode", "bayes", "--data", str(scaled),
                     "--count", "20", "--seed", "1", "--out-dir", str(out))
    assert result.exit_code == 0, result.output
    samples = pd.read_csv(out / "samples.csv").to_numpy()
    assert np.all(np.isfinite(samples))
    assert samples.std() < 10.0, f"样本尺度应接近 1，实际标准差 {samples.std():.3g}"
