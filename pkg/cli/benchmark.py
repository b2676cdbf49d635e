"""
benchmark 子命令
- KL 模式：按场景模拟数据，比较各方法估计与真值之间的 KL
- log score 模式（--data）：随机划分训练/留出重复样本，比较留出数据的平均负对数密度
任务在 asyncio 信号量下并发执行，结果按提交顺序汇总
"""
import asyncio
import math
from pathlib import Path
from typing import Any, Callable, Optional

import click
import numpy as np

from assembly import kl_divergence, log_score
from baselines import ESTIMATOR_TAGS, EstimatorOutput, exponential_fit, mle_regression, run_estimator, sample_cov, scovt
from config import get_settings
from covgen import build_covariance, simulate_replicates
from errors import InputError, SingularEstimate
from geometry import DistanceMetric, LocationSet, OrderedGeometry, build_geometry, prior_correlation_guess
from infer import FitResult, fit_bayes, fit_map, posterior_covariance_summary
from models import BenchmarkRecord, CauchyModel, MaternModel, MHConfig, PaciorekModel, Scenario
from storage import read_locations, read_matrix, write_records
from .common import common_options, echo, handle_errors, prepare_run, resolve_threads
from .simulate import parse_sites

# 方差统一为 5；每个场景自带站点布局
SCENARIOS: dict[str, Scenario] = {
    "matern-grid": Scenario(
        model=MaternModel(variance=5.0, range=0.5, smoothness=1.0),
        sites="grid:50x50",
    ),
    "cauchy": Scenario(
        model=CauchyModel(variance=5.0, range=0.25, alpha=1.0, beta=0.5),
        sites="grid:50x50",
    ),
    "paciorek": Scenario(
        model=PaciorekModel(variance=5.0, smoothness=1.0),
        sites="grid:50x50",
    ),
    "matern-random": Scenario(
        model=MaternModel(variance=5.0, range=0.25, smoothness=1.0),
        sites="random:2500",
    ),
}


def scenario_sites(name: str, override: Optional[str], seed: int) -> LocationSet:
    """场景的站点；override 给出时替换场景自带的布局"""
    return parse_sites(override or SCENARIOS[name].sites, seed)


def correlation_of(sigma: np.ndarray) -> np.ndarray:
    """协方差 → 相关矩阵"""
    sd = np.sqrt(np.diag(sigma))
    R = sigma / np.outer(sd, sd)
    np.fill_diagonal(R, 1.0)
    return np.clip((R + R.T) / 2.0, -1.0, 1.0)


def format_params(params: dict[str, Any]) -> str:
    return ";".join(f"{key}={value:.6g}" for key, value in sorted(params.items()))


class TaskContext:
    """一个（场景/划分, N, 种子）任务内共享的拟合结果"""

    def __init__(self, Y: np.ndarray, locs: LocationSet, geometry: OrderedGeometry, seed: int,
                 taper_range: float, mh_iter: int, posterior_draws: int):
        self.Y = Y
        self.locs = locs
        self.geometry = geometry
        self.seed = seed
        self.taper_range = taper_range
        self.mh_iter = mh_iter
        self.posterior_draws = posterior_draws
        self._ours: Optional[FitResult] = None

    def ours_map(self) -> FitResult:
        if self._ours is None:
            self._ours = fit_map(self.Y, self.geometry)
        return self._ours

    def _ours_bayes(self) -> np.ndarray:
        n_burn = self.mh_iter // 2
        thin = max((self.mh_iter - n_burn) // self.posterior_draws, 1)
        config = MHConfig(n_iter=self.mh_iter, n_burn=n_burn, thin=thin, seed=self.seed)
        result = fit_bayes(self.Y, self.geometry, config)
        thetas = result.mh.thetas()[-self.posterior_draws:]
        return posterior_covariance_summary(self.Y, self.geometry, thetas, self.seed).mean

    def estimate(self, tag: str) -> EstimatorOutput:
        """按方法标签计算估计"""
        if tag == "scov":
            return run_estimator(tag, sample_cov, self.Y)
        if tag == "scovt":
            return run_estimator(tag, scovt, self.Y, self.locs, self.taper_range)
        if tag == "exp":
            return run_estimator(tag, exponential_fit, self.Y, self.locs)
        if tag == "ours-map":
            fit = self.ours_map()
            # 拟合结果在任务内缓存，耗时取拟合本身
            out = run_estimator(tag, lambda: fit.factor)
            out.runtime_s = fit.runtime_s
            out.params = {"m": fit.m, **dict(zip(("theta1", "theta2", "theta3"), fit.theta.as_tuple()))}
            return out
        if tag == "mle":
            m = self.ours_map().m
            out = run_estimator(tag, mle_regression, self.Y, self.geometry, m)
            out.params = {"m": m}
            return out
        if tag == "ours-bayes":
            return run_estimator(tag, self._ours_bayes)
        raise InputError(f"unknown estimator: {tag}")


def _records(ctx: TaskContext, scenario: str, estimators: tuple[str, ...], metric: str,
             evaluate: Callable[[np.ndarray], float], timings: bool) -> list[BenchmarkRecord]:
    rows = []
    for tag in estimators:
        # 奇异估计记为 inf
        try:
            out = ctx.estimate(tag)
            value, singular = evaluate(out.dense()), False
        except SingularEstimate:
            out, value, singular = None, math.inf, True
        rows.append(BenchmarkRecord(
            scenario=scenario,
            estimator=tag,
            n_replicates=ctx.Y.shape[0],
            seed=ctx.seed,
            metric=metric,
            value=value,
            singular=singular,
            params=format_params(out.params) if out is not None else "",
            runtime_s=out.runtime_s if timings and out is not None else 0.0,
        ))
    return rows


async def run_tasks(jobs: list[Callable[[], list[BenchmarkRecord]]], threads: int) -> list[BenchmarkRecord]:
    """信号量限制并发，按提交顺序汇总"""
    semaphore = asyncio.Semaphore(threads)
    finished = 0

    async def run_with_limit(job):
        nonlocal finished
        async with semaphore:
            result = await asyncio.to_thread(job)
        finished += 1
        echo("Benchmark", f"{finished}/{len(jobs)} tasks done")
        return result

    results = await asyncio.gather(*(run_with_limit(job) for job in jobs))
    return [record for batch in results for record in batch]


def kl_jobs(scenarios, sites, estimators, n_replicates, seeds, metric, m_max, options, timings):
    """KL 模式任务：(场景, N, 种子)"""
    settings = get_settings()
    jobs = []
    for name in scenarios:
        locs = scenario_sites(name, sites, seeds[0])
        sigma = build_covariance(SCENARIOS[name].model, locs)
        if metric == "truecorr":
            base = build_geometry(locs, DistanceMetric.correlation(correlation_of(sigma)), m_max=m_max)
        elif metric == "euclid":
            base = build_geometry(locs, DistanceMetric.euclidean(), m_max=m_max)
        else:
            base = None

        for N in n_replicates:
            for seed in seeds:
                def job(name=name, locs=locs, sigma=sigma, base=base, N=N, seed=seed):
                    Y = simulate_replicates(sigma, N, seed)
                    if base is not None:
                        geometry = base
                    else:
                        R = prior_correlation_guess(Y, locs)
                        geometry = build_geometry(locs, DistanceMetric.correlation(R), m_max=m_max)
                    ctx = TaskContext(Y, locs, geometry, seed, **options)

                    def evaluate(s):
                        return kl_divergence(s, sigma, halve=settings.kl_halve)

                    return _records(ctx, name, estimators, "kl", evaluate, timings)

                jobs.append(job)
    return jobs


def logscore_jobs(W, locs, label, estimators, n_replicates, test_size, splits, seed, metric, m_max,
                  standardize, options, timings):
    """log score 模式任务：(划分, N)"""
    total = W.shape[0]
    if max(n_replicates) + test_size > total:
        raise InputError(f"need {max(n_replicates) + test_size} replicates, the data has {total}")
    if metric == "truecorr":
        raise InputError("truecorr needs a known covariance; use euclid or corr with --data")

    jobs = []
    for split in range(splits):
        rows = np.random.default_rng([seed, split]).permutation(total)
        for N in n_replicates:
            def job(rows=rows, N=N, split=split):
                test, train = W[rows[:test_size]], W[rows[test_size:test_size + N]]
                if standardize:
                    mean, sd = train.mean(axis=0), train.std(axis=0)
                    scale = np.where(sd > 0, sd, 1.0)
                    train, test = (train - mean) / scale, (test - mean) / scale
                if metric == "corr":
                    R = correlation_of(scovt(train, locs, options["taper_range"]))
                    geometry = build_geometry(locs, DistanceMetric.correlation(R), m_max=m_max)
                else:
                    geometry = build_geometry(locs, DistanceMetric.euclidean(), m_max=m_max)
                ctx = TaskContext(train, locs, geometry, seed + split, **options)
                return _records(ctx, label, estimators, "logscore", lambda s: log_score(s, test), timings)

            jobs.append(job)
    return jobs


@click.command("benchmark")
@click.option("--scenario", "scenarios", type=click.Choice(list(SCENARIOS)), multiple=True, default=tuple(SCENARIOS), show_default=True)
@click.option("--sites", default=None, help="覆盖全部场景的站点布局：grid:ROWSxCOLS 或 random:N")
@click.option("--estimator", "estimators", type=click.Choice(ESTIMATOR_TAGS), multiple=True,
              default=("scov", "scovt", "mle", "exp", "ours-map"), show_default=True)
@click.option("--n-replicates", "-N", type=click.IntRange(min=1), multiple=True, default=(10, 50, 200), show_default=True)
@click.option("--n-seeds", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--metric", type=click.Choice(["euclid", "corr", "truecorr"]), default="euclid", show_default=True)
@click.option("--m-max", type=click.IntRange(min=1), default=None)
@click.option("--taper-range", type=float, default=0.1, show_default=True)
@click.option("--mh-iter", type=click.IntRange(min=2), default=2000, show_default=True)
@click.option("--posterior-draws", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="给出时运行 log score 模式")
@click.option("--locations", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--test-size", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--splits", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--standardize/--no-standardize", default=False, show_default=True)
@click.option("--timings/--no-timings", default=False, show_default=True, help="记录耗时（表格不再逐字节可复现）")
@common_options
@click.pass_context
@handle_errors
def benchmark(ctx, scenarios, sites, estimators, n_replicates, n_seeds, metric, m_max, taper_range, mh_iter,
              posterior_draws, data, locations, test_size, splits, standardize, timings, seed, threads,
              out_dir, config_file):
    """写出 kl_table.csv 或 logscore_table.csv（长表）"""
    threads = resolve_threads(threads)
    m_max = m_max or get_settings().m_max
    if taper_range <= 0:
        raise click.BadParameter("taper range must be positive", param_hint="--taper-range")
    options = {"taper_range": taper_range, "mh_iter": mh_iter, "posterior_draws": posterior_draws}

    if data is not None:
        if locations is None:
            raise click.UsageError("log score mode needs --locations")
        W = read_matrix(data)
        locs = read_locations(locations)
        if W.shape[1] != locs.n:
            raise InputError(f"{data} has {W.shape[1]} columns but {locations} has {locs.n} sites")
        jobs = logscore_jobs(W, locs, Path(data).stem, estimators, n_replicates, test_size, splits, seed,
                             metric, m_max, standardize, options, timings)
        table = "logscore_table.csv"
    else:
        seeds = [seed + k for k in range(n_seeds)]
        jobs = kl_jobs(scenarios, sites, estimators, n_replicates, seeds, metric, m_max, options, timings)
        table = "kl_table.csv"

    out_dir = prepare_run(ctx)
    records = asyncio.run(run_tasks(jobs, threads))
    path = write_records(out_dir / table, records)
    echo("Benchmark", f"{len(records)} rows -> {path}")
