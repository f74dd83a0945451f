"""Group spike-and-slab selection for logistic regression."""

from ._core import (
    ConsistencyError,
    GssError,
    Hyperparams,
    SizeError,
    StructuralError,
    UsageError,
    compute_metrics,
    default_hyperparams,
    fit,
    matthews_correlation,
    oracle_tv,
    sample_truncated_normal,
    select_median_probability_model,
    simulate,
    t_scale_for,
)

__all__ = [
    "ConsistencyError",
    "GssError",
    "Hyperparams",
    "SizeError",
    "StructuralError",
    "UsageError",
    "compute_metrics",
    "default_hyperparams",
    "fit",
    "matthews_correlation",
    "oracle_tv",
    "sample_truncated_normal",
    "select_median_probability_model",
    "simulate",
    "t_scale_for",
]

__version__ = "0.1.0"
