"""Regression with stochastic, per-impulse time delays (TVS regression)."""

__version__ = "0.1.0"

from ._accel import HAS_NUMBA
from .fit import (FitConfig, FitResult, ScalingRecord, destandardize, destandardize_params,
                  fit, objective, standardize)
from .likelihood import LOGLIK_FLOOR, JointLogLik, gaussian_loglik, joint_loglik, poisson_loglik
from .model import (DegenerateInputError, ImpulseSet, InvalidParameterError, InvalidShiftError,
                    ModelParams, ShiftVector, SparsityWarning, TimeSeries, TVSError,
                    apply_shifts, decompose, sparsity_check)
from .ols import OlsResult, ols_fit
from .search import (Block, SearchBudgetError, SearchConfig, exhaustive_search,
                     partition_blocks, search_shifts)
from .simulate import SimConfig, SimOutput, simulate

__all__ = [
    "HAS_NUMBA", "FitConfig", "FitResult", "ScalingRecord", "destandardize",
    "destandardize_params", "fit", "objective", "standardize", "LOGLIK_FLOOR",
    "JointLogLik", "gaussian_loglik", "joint_loglik", "poisson_loglik",
    "DegenerateInputError", "ImpulseSet", "InvalidParameterError", "InvalidShiftError",
    "ModelParams", "ShiftVector", "SparsityWarning", "TimeSeries", "TVSError",
    "apply_shifts", "decompose", "sparsity_check", "OlsResult", "ols_fit", "Block",
    "SearchBudgetError", "SearchConfig", "exhaustive_search", "partition_blocks",
    "search_shifts", "SimConfig", "SimOutput", "simulate",
]
