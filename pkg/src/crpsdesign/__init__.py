"""Targeted sequential design for Gaussian-process excursion-set estimation.

Acquisition criteria built from the threshold-weighted CRPS, ordinary
kriging with a Tanimoto kernel for binary fingerprints, and the benchmark
protocol that compares them against classical criteria.
"""
__version__ = "0.1.0"

from .acquisition import CRITERIA, CriterionSpec, select_next
from .experiment import Dataset, ExperimentConfig, load_dataset, make_synthetic, run_repetitions, run_sequential
from .gp import GPModel, condition, fit_hyperparams
from .kernels import KernelSpec
from .metrics import EvalReport
from .prob import Gaussian1D
from .scoring import WeightSpec

__all__ = [
    "CRITERIA",
    "CriterionSpec",
    "Dataset",
    "EvalReport",
    "ExperimentConfig",
    "GPModel",
    "Gaussian1D",
    "KernelSpec",
    "WeightSpec",
    "condition",
    "fit_hyperparams",
    "load_dataset",
    "make_synthetic",
    "run_repetitions",
    "run_sequential",
    "select_next",
]
