"""
fit 子命令：经验贝叶斯（eb）或全贝叶斯（bayes）拟合
"""
from pathlib import Path

import click

from assembly import dense_covariance
from baselines import standardize as standardize_data
from infer import fit_bayes, fit_map
from models import FitSummary, Hyperparameters, MHConfig
from storage import save_factor, write_chain, write_json, write_matrix, write_ordering
from .common import common_options, echo, handle_errors, prepare_run, resolve_threads
from .inputs import load_data, make_geometry


@click.command("fit")
@click.option("--data", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True, help="N×n 数据 Y.csv")
@click.option("--locations", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--mode", type=click.Choice(["eb", "bayes"]), default="eb", show_default=True)
@click.option("--metric", type=click.Choice(["euclid", "corr"]), default="euclid", show_default=True)
@click.option("--correlation", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="corr 度量使用的相关矩阵")
@click.option("--ordering", type=click.Choice(["maximin", "coordinate"]), default="maximin", show_default=True)
@click.option("--m-max", type=click.IntRange(min=1), default=None)
@click.option("--standardize/--no-standardize", default=False, show_default=True, help="逐站点标准化")
@click.option("--init", "init_theta", type=(float, float, float), default=None, help="θ 初值 θ1 θ2 θ3")
@click.option("--n-iter", type=click.IntRange(min=0), default=20_000, show_default=True)
@click.option("--n-burn", type=click.IntRange(min=0), default=10_000, show_default=True)
@click.option("--thin", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--write-sigma/--no-write-sigma", default=False, show_default=True, help="另写出稠密 Σ̂")
@common_options
@click.pass_context
@handle_errors
def fit(ctx, data, locations, mode, metric, correlation, ordering, m_max, standardize, init_theta,
        n_iter, n_burn, thin, write_sigma, seed, threads, out_dir, config_file):
    """拟合 θ 与稀疏逆 Cholesky 因子"""
    if mode == "bayes" and n_burn >= n_iter:
        raise click.BadParameter("n-burn must be smaller than n-iter", param_hint="--n-burn")
    threads = resolve_threads(threads)
    Y, locs = load_data(data, locations)
    if standardize:
        Y, _, _ = standardize_data(Y)
    geometry = make_geometry(Y, locs, metric, ordering, m_max, correlation)
    init = Hyperparameters(theta1=init_theta[0], theta2=init_theta[1], theta3=init_theta[2]) if init_theta else None
    out_dir = prepare_run(ctx)

    if mode == "eb":
        result = fit_map(Y, geometry, init=init, threads=threads)
    else:
        config = MHConfig(n_iter=n_iter, n_burn=n_burn, thin=thin, init_theta=init, seed=seed)
        result = fit_bayes(Y, geometry, config, threads=threads)
        chain = result.mh
        write_chain(out_dir / "chain.csv", chain.iterations, chain.theta_chain, chain.log_post, chain.accepted)

    save_factor(out_dir, result.factor)
    write_ordering(out_dir / "ordering.csv", geometry)
    if write_sigma:
        write_matrix(out_dir / "sigma_hat.csv", dense_covariance(result.factor))

    summary = FitSummary(
        mode=mode,
        metric=metric,
        ordering=ordering,
        n_sites=locs.n,
        n_replicates=Y.shape[0],
        dimension=locs.p,
        m=result.m,
        theta=result.theta,
        log_likelihood=result.log_likelihood,
        runtime_s=result.runtime_s,
        chain=result.mh.summary if result.mh is not None else None,
    )
    write_json(out_dir / "summary.json", summary)
    echo("Fit", f"{mode} θ={result.theta.as_tuple()} m={result.m} loglik={result.log_likelihood:.6g} -> {out_dir}")
