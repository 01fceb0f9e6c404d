"""Basis-path test data generation with a genetic algorithm."""

from .cfg import (BasisPath, ControlFlowGraph, build_cfg, cyclomatic_complexity,
                  enumerate_basis_paths, export_dot, verify_independence)
from .executor import ExecutionTrace, branch_function, divergence_point, execute
from .fitness import FitnessConfig, FitnessValue, classify, for_path, paper_fitness, path_fitness
from .ga import GaConfig, RunResult, evolve, random_search
from .lang import Program, bundled, load_program, parse, pretty_print, tokenize, validate

__all__ = [
    "BasisPath", "ControlFlowGraph", "ExecutionTrace", "FitnessConfig", "FitnessValue", "GaConfig",
    "Program", "RunResult", "branch_function", "build_cfg", "bundled", "classify",
    "cyclomatic_complexity", "divergence_point", "enumerate_basis_paths", "evolve", "execute",
    "export_dot", "for_path", "load_program", "paper_fitness", "parse", "path_fitness",
    "pretty_print", "random_search", "tokenize", "validate", "verify_independence",
]
__version__ = "0.1.0"
