"""
命令行公共部分
公共参数（--seed/--threads/--out-dir/--config）、错误到退出码的映射、manifest 写出
"""
import functools
from pathlib import Path
from typing import Callable

import click

from config import get_settings, load_run_config
from errors import InputError, NumericalError
from storage import ensure_out_dir, write_manifest


class NumericalFailure(click.ClickException):
    """数值计算失败，退出码 3"""
    exit_code = 3

    def show(self, file=None) -> None:
        click.echo(f"Numerical error: {self.format_message()}", err=True)


def _load_config(ctx: click.Context, param: click.Parameter, value):
    """--config 的 eager 回调：把运行配置文件的值作为默认值，命令行显式参数优先"""
    if value is None:
        return value
    try:
        values = load_run_config(value)
    except (FileNotFoundError, ValueError) as e:
        raise click.BadParameter(str(e), ctx=ctx, param=param) from e

    multiple = {p.name for p in ctx.command.params if getattr(p, "multiple", False)}
    defaults = {}
    for key, v in values.items():
        if key in multiple and isinstance(v, str):
            v = [s.strip() for s in v.split(",") if s.strip()]
        defaults[key] = v
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


def common_options(fn: Callable) -> Callable:
    """所有子命令共享的参数"""
    options = [
        click.option("--seed", type=int, default=0, show_default=True, help="主随机种子"),
        click.option("--threads", type=click.IntRange(min=1), default=None, help="线程数（默认取配置）"),
        click.option(
            "--out-dir",
            type=click.Path(file_okay=False, path_type=Path),
            default=Path("."),
            show_default=True,
            help="输出目录",
        ),
        click.option(
            "--config",
            "config_file",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            is_eager=True,
            callback=_load_config,
            help="key=value 运行配置文件或 manifest.json",
        ),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def handle_errors(fn: Callable) -> Callable:
    """输入类错误 → 用法错误（退出码 2），数值类错误 → 退出码 3"""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InputError as e:
            raise click.UsageError(str(e)) from e
        except NumericalError as e:
            raise NumericalFailure(str(e)) from e

    return wrapper


def resolve_threads(threads: int | None) -> int:
    return threads or get_settings().threads


def prepare_run(ctx: click.Context) -> Path:
    """创建输出目录并写出 manifest（记录解析后的全部参数）"""
    params = dict(ctx.params)
    params.pop("config_file", None)
    params["threads"] = resolve_threads(params.get("threads"))
    out_dir = ensure_out_dir(params["out_dir"])
    write_manifest(out_dir, ctx.command.name, params, params["seed"], params["threads"])
    return out_dir


def echo(tag: str, message: str) -> None:
    click.echo(f"[{tag}] {message}")
