"""Benchmark graphs, metrics and experiment suites."""

from .datasets import DatasetMissing, best_known, load_dataset
from .experiments import SUITES, ExperimentReport, SuiteConfig, run_experiment
from .metrics import modularity, nmi, size_deviation
from .sbm import SbmConfig, equal_sizes, generate_sbm

__all__ = [
    "DatasetMissing",
    "ExperimentReport",
    "SUITES",
    "SbmConfig",
    "SuiteConfig",
    "best_known",
    "equal_sizes",
    "generate_sbm",
    "load_dataset",
    "modularity",
    "nmi",
    "run_experiment",
    "size_deviation",
]
