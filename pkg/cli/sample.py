"""
sample 子命令：后验预测抽样
map 模式使用已拟合的固定因子；bayes 模式从链中抽 θ，再抽 (U, D) 与场
"""
from pathlib import Path

import click
import numpy as np

from assembly import sample_field, sample_fields
from baselines import standardize as standardize_data
from errors import InputError
from geometry import OrderedGeometry
from infer import draw_factor
from models import FitSummary, Hyperparameters, RunConfig
from storage import MANIFEST_NAME, load_factor, read_chain, read_json, read_matrix, read_ordering, write_matrix
from .common import common_options, echo, handle_errors, prepare_run, resolve_threads


def load_fitted_geometry(fit_dir: Path, dimension: int) -> OrderedGeometry:
    """由 ordering.csv 还原几何结构"""
    path = fit_dir / "ordering.csv"
    if not path.exists():
        raise InputError(f"ordering file not found: {path}")
    perm, neighbors = read_ordering(path)
    counts = [len(g) for g in neighbors]
    return OrderedGeometry(perm=perm, neighbors=tuple(neighbors), m_max=max(max(counts, default=0), 1), p=dimension)


def fitted_with_standardize(fit_dir: Path) -> bool:
    """fit 是否对数据做过逐站点标准化（读取 fit 的 manifest）"""
    path = fit_dir / MANIFEST_NAME
    if not path.exists():
        return False
    return bool(read_json(path, RunConfig).options.get("standardize", False))


@click.command("sample")
@click.option("--fit-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True, help="fit 的输出目录")
@click.option("--mode", type=click.Choice(["map", "bayes"]), default="map", show_default=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="bayes 模式下拟合所用的数据")
@click.option("--count", type=click.IntRange(min=0), default=100, show_default=True)
@common_options
@click.pass_context
@handle_errors
def sample(ctx, fit_dir, mode, data, count, seed, threads, out_dir, config_file):
    """写出 samples.csv（count×n，原始站点顺序）"""
    threads = resolve_threads(threads)
    rng = np.random.default_rng(seed)

    if mode == "map":
        icf = load_factor(fit_dir)
        out_dir = prepare_run(ctx)
        samples = sample_fields(icf, count, rng)
    else:
        chain_path = fit_dir / "chain.csv"
        if not chain_path.exists():
            raise click.UsageError(f"bayes mode needs a chain file, not found: {chain_path}")
        if data is None:
            raise click.UsageError("bayes mode needs --data")
        chain = read_chain(chain_path)
        if len(chain) == 0:
            raise click.UsageError(f"{chain_path} holds no samples")
        summary_path = fit_dir / "summary.json"
        if not summary_path.exists():
            raise InputError(f"fit summary not found: {summary_path}")
        summary = read_json(summary_path, FitSummary)
        geometry = load_fitted_geometry(fit_dir, summary.dimension)
        Y = read_matrix(data)
        if Y.shape[1] != geometry.n:
            raise InputError(f"{data} has {Y.shape[1]} columns but the fit has {geometry.n} sites")
        if fitted_with_standardize(fit_dir):
            # 与 fit 保持同一尺度
            Y, _, _ = standardize_data(Y)
        out_dir = prepare_run(ctx)

        Y_ordered = Y[:, geometry.perm]
        picks = rng.integers(0, len(chain), size=count)
        samples = np.zeros((count, geometry.n))
        for k, row in enumerate(picks):
            theta = Hyperparameters(
                theta1=float(chain["theta1"].iloc[row]),
                theta2=float(chain["theta2"].iloc[row]),
                theta3=float(chain["theta3"].iloc[row]),
            )
            icf = draw_factor(Y_ordered, geometry, theta, (seed, k), threads=threads)
            samples[k] = sample_field(icf, rng)

    path = write_matrix(out_dir / "samples.csv", samples)
    echo("Sample", f"{mode} mode, {count} fields -> {path}")
