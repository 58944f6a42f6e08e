"""Compressive multi-kernel learning.

Lossy rank-reduction of kernel Gram matrices via discriminant projections,
non-negative multi-kernel combination, and an SVM harness that scores each
released kernel on a utility task and a privacy task.
"""

__version__ = "0.1.0"

from .compression import (
    CompressiveKernel,
    compress,
    compress_cross,
    normalize_compressive,
    rank_budget_check,
)
from .config import ExperimentConfig, KernelConfig, load_config
from .dataset import Dataset, DatasetSchema, load_dataset, split_indices, standardize
from .dca import DcaModel, empirical_scatter, fit_dca, fit_kdca, project, scatter
from .errors import CmklError, ConfigError, DataError, NumericalError
from .kernels import (
    GramMatrix,
    KernelSpec,
    center_cross,
    center_gram,
    cross_gram,
    eval_kernel,
    gram,
    normalize_trace,
)
from .multikernel import (
    MultiKernel,
    WeightVector,
    combine,
    snr_score,
    upr_trace,
    weights_alignment,
    weights_snr,
    weights_uniform,
    weights_upr_qp,
)
from .report import ExperimentReport, MethodRow, emit_report
from .runner import cross_validate, run_experiment
from .svm import SvmModel, accuracy, fit, predict

__all__ = [
    "CmklError",
    "CompressiveKernel",
    "ConfigError",
    "DataError",
    "Dataset",
    "DatasetSchema",
    "DcaModel",
    "ExperimentConfig",
    "ExperimentReport",
    "GramMatrix",
    "KernelConfig",
    "KernelSpec",
    "MethodRow",
    "MultiKernel",
    "NumericalError",
    "SvmModel",
    "WeightVector",
    "accuracy",
    "center_cross",
    "center_gram",
    "combine",
    "compress",
    "compress_cross",
    "cross_gram",
    "cross_validate",
    "emit_report",
    "empirical_scatter",
    "eval_kernel",
    "fit",
    "fit_dca",
    "fit_kdca",
    "gram",
    "load_config",
    "load_dataset",
    "normalize_compressive",
    "normalize_trace",
    "predict",
    "project",
    "rank_budget_check",
    "run_experiment",
    "scatter",
    "snr_score",
    "split_indices",
    "standardize",
    "upr_trace",
    "weights_alignment",
    "weights_snr",
    "weights_uniform",
    "weights_upr_qp",
    "__version__",
]
