"""
simulate 子命令：生成站点、真值协方差与重复样本
"""
import re

import click
import numpy as np
from pydantic import TypeAdapter, ValidationError

from covgen import build_covariance, grid_locations, random_locations, simulate_replicates
from errors import InputError
from geometry import LocationSet
from models import CovarianceModel
from storage import write_locations, write_matrix
from .common import common_options, echo, handle_errors, prepare_run

_MODEL_ADAPTER = TypeAdapter(CovarianceModel)
_SITES_PATTERN = re.compile(r"^(grid:(?P<rows>\d+)x(?P<cols>\d+)|random:(?P<n>\d+))$")


def parse_sites(spec: str, seed: int) -> LocationSet:
    """grid:ROWSxCOLS（单位正方形，含端点）或 random:N（单位正方形上均匀分布）"""
    match = _SITES_PATTERN.match(spec.strip())
    if not match:
        raise InputError(f"bad site spec {spec!r}; expected grid:ROWSxCOLS or random:N")
    if match.group("n") is not None:
        return random_locations(int(match.group("n")), seed)
    return grid_locations(int(match.group("rows")), int(match.group("cols")))


def parse_model(kind: str, variance: float, range_: float, smoothness: float, alpha: float, beta: float):
    """
    由命令行参数构造协方差模型
    指数模型写成 variance·exp(−d/range)，即 θ1 = variance，θ2 = 2/range
    """
    fields = {"kind": kind, "variance": variance}
    if kind == "matern":
        fields.update(range=range_, smoothness=smoothness)
    elif kind == "exponential":
        fields = {"kind": kind, "theta1": variance, "theta2": 2.0 / range_}
    elif kind == "cauchy":
        fields.update(range=range_, alpha=alpha, beta=beta)
    elif kind == "paciorek":
        fields.update(smoothness=smoothness)
    try:
        return _MODEL_ADAPTER.validate_python(fields)
    except ValidationError as e:
        raise InputError(f"invalid {kind} model: {e.errors()[0]['msg']}") from e


@click.command("simulate")
@click.option("--model", "kind", type=click.Choice(["matern", "exponential", "cauchy", "paciorek"]), default="matern", show_default=True)
@click.option("--variance", type=float, default=1.0, show_default=True)
@click.option("--range", "range_", type=float, default=0.25, show_default=True)
@click.option("--smoothness", type=float, default=1.0, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True, help="Cauchy α")
@click.option("--beta", type=float, default=0.5, show_default=True, help="Cauchy β")
@click.option("--sites", default="grid:20x20", show_default=True, help="grid:ROWSxCOLS 或 random:N")
@click.option("--n-replicates", "-N", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--jitter", type=float, default=0.0, show_default=True, help="Cholesky 前加到对角线的数值块金")
@click.option("--tau2", type=float, default=0.0, show_default=True, help=">0 时另写出含噪数据 W.csv")
@common_options
@click.pass_context
@handle_errors
def simulate(ctx, kind, variance, range_, smoothness, alpha, beta, sites, n_replicates, jitter, tau2, seed, threads, out_dir, config_file):
    """生成 locations.csv、Y.csv 与 sigma_true.csv"""
    if tau2 < 0:
        raise InputError(f"tau2 must be non-negative, got {tau2}")
    model = parse_model(kind, variance, range_, smoothness, alpha, beta)
    locs = parse_sites(sites, seed)
    out_dir = prepare_run(ctx)

    sigma = build_covariance(model, locs)
    Y = simulate_replicates(sigma, n_replicates, seed, jitter=jitter)

    write_locations(out_dir / "locations.csv", locs)
    write_matrix(out_dir / "sigma_true.csv", sigma)
    write_matrix(out_dir / "Y.csv", Y)
    if tau2 > 0:
        noise = np.random.default_rng([seed, 1]).standard_normal(Y.shape)
        write_matrix(out_dir / "W.csv", Y + np.sqrt(tau2) * noise)

    echo("Simulate", f"{kind} model, {locs.n} sites, N={n_replicates} -> {out_dir}")
