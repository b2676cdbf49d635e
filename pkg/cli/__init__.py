"""
命令行子命令
"""
from .benchmark import benchmark
from .common import NumericalFailure
from .fit import fit
from .gibbs import gibbs
from .order import order
from .sample import sample
from .simulate import simulate

COMMANDS = [simulate, order, fit, sample, benchmark, gibbs]

__all__ = ["COMMANDS", "NumericalFailure", "benchmark", "fit", "gibbs", "order", "sample", "simulate"]
