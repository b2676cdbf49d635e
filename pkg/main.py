"""
空间协方差估计与场仿真
主入口文件
"""
import click

from cli import COMMANDS
from config import get_settings


@click.group()
@click.option("--quiet", is_flag=True, help="关闭库内进度输出")
@click.version_option("0.1.0", prog_name="spatialcov")
def cli(quiet: bool):
    """稀疏逆 Cholesky 因子的贝叶斯空间协方差估计"""
    if quiet:
        get_settings().verbose = False


# 注册子命令
for command in COMMANDS:
    cli.add_command(command)


if __name__ == "__main__":
    cli()
