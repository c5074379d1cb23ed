"""Polya-Gamma augmented Gaussian-process binary classification.

Exact PG(1,c) sampling, blocked Gibbs posterior inference, Fisher-identity
hyperparameter training, Gauss-Hermite predictive quadrature, and
calibration/retrieval evaluation over precomputed embeddings.
"""

__version__ = "0.1.0"

from .data import (
    EmbeddingDataset,
    SynthSpec,
    generate_synthetic,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
)
from .errors import (
    DatasetParseError,
    InvalidArgumentError,
    NumericalError,
    PggpError,
    SchemaError,
    UnsupportedVersionError,
)
from .gibbs import GibbsChainState, GibbsConfig, run_chains, step_g, step_w
from .kernels import KernelSpec, PsdMatrix, factorize, kernel_matrix, mvn_sample
from .metrics import (
    CalibrationReport,
    ScoredItem,
    binary_calibration_items,
    ece,
    group_items,
    mean_average_precision,
    recall_at_k,
    reliability_export,
)
from .pg import IdentityReport, pg_mean, sample_pg1, sample_pg1_array, verify_augmentation_identity
from .predict import (
    PredictiveResult,
    QuadratureRule,
    latent_predictive,
    predict,
    predict_batch,
    predictive_prob,
)
from .rng import RngStream, derive_seed
from .training import FittedModel, TrainConfig, conditional_log_marginal, fit, grad_log_marginal

__all__ = [
    "EmbeddingDataset", "SynthSpec", "generate_synthetic", "load_dataset",
    "load_model", "save_dataset", "save_model",
    "DatasetParseError", "InvalidArgumentError", "NumericalError", "PggpError",
    "SchemaError", "UnsupportedVersionError",
    "GibbsChainState", "GibbsConfig", "run_chains", "step_g", "step_w",
    "KernelSpec", "PsdMatrix", "factorize", "kernel_matrix", "mvn_sample",
    "CalibrationReport", "ScoredItem", "binary_calibration_items", "ece",
    "group_items", "mean_average_precision", "recall_at_k", "reliability_export",
    "IdentityReport", "pg_mean", "sample_pg1", "sample_pg1_array",
    "verify_augmentation_identity",
    "PredictiveResult", "QuadratureRule", "latent_predictive", "predict",
    "predict_batch", "predictive_prob",
    "RngStream", "derive_seed",
    "FittedModel", "TrainConfig", "conditional_log_marginal", "fit",
    "grad_log_marginal",
]
