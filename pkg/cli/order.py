"""
order 子命令：导出排序与条件集
"""
from pathlib import Path

import click

from storage import read_locations, read_matrix, write_ordering
from .common import common_options, echo, handle_errors, prepare_run
from .inputs import make_geometry


@click.command("order")
@click.option("--locations", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="corr 度量且未给相关矩阵时需要")
@click.option("--metric", type=click.Choice(["euclid", "corr"]), default="euclid", show_default=True)
@click.option("--correlation", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--ordering", type=click.Choice(["maximin", "coordinate"]), default="maximin", show_default=True)
@click.option("--m-max", type=click.IntRange(min=1), default=None)
@common_options
@click.pass_context
@handle_errors
def order(ctx, locations, data, metric, correlation, ordering, m_max, seed, threads, out_dir, config_file):
    """写出 ordering.csv"""
    locs = read_locations(locations)
    Y = read_matrix(data) if data is not None else None
    geometry = make_geometry(Y, locs, metric, ordering, m_max, correlation)
    out_dir = prepare_run(ctx)
    path = write_ordering(out_dir / "ordering.csv", geometry)
    echo("Order", f"{geometry.n} sites, {geometry.nonzeros} neighbor links -> {path}")
