"""Decentralized accelerated optimization with multi-consensus (Mudag) and baselines."""

from .consensus import consensus_error, fastmix, plain_mix
from .graph import Graph, MixingMatrix, build_mixing_matrix, generate_erdos_renyi, generate_named
from .kernels import BACKEND
from .mudag import MudagConfig, run_mudag, theoretical_K
from .objective import LogisticProblem, QuadraticProblem, solve_reference

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Graph",
    "LogisticProblem",
    "MixingMatrix",
    "MudagConfig",
    "QuadraticProblem",
    "build_mixing_matrix",
    "consensus_error",
    "fastmix",
    "generate_erdos_renyi",
    "generate_named",
    "plain_mix",
    "run_mudag",
    "solve_reference",
    "theoretical_K",
]
