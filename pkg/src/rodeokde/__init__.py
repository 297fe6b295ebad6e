"""Multi-class probabilistic classification by sparse kernel density estimation.

Per-class Gaussian product-kernel densities with local greedy bandwidth
selection, bandwidth-based variable selection, posterior-ratio classification,
and an adaptive per-class sample-size planner.
"""

from .kernels import (
    GAUSS_ALPHA,
    GAUSS_L2_SQ,
    product_kernel_density,
    log_product_kernel_density,
    second_partial_density,
    z_derivative,
    z_variance,
)
from .rodeo import RodeoConfig, RodeoResult, initial_bandwidth, select_local_bandwidths
from .classifier import ClassPosterior, Classifier, TrainingSet
from .features import BandwidthSummary, class_feature_report, mean_bandwidths, select_features, z_scores

__all__ = [
    "GAUSS_ALPHA",
    "GAUSS_L2_SQ",
    "product_kernel_density",
    "log_product_kernel_density",
    "second_partial_density",
    "z_derivative",
    "z_variance",
    "RodeoConfig",
    "RodeoResult",
    "initial_bandwidth",
    "select_local_bandwidths",
    "TrainingSet",
    "Classifier",
    "ClassPosterior",
    "BandwidthSummary",
    "mean_bandwidths",
    "z_scores",
    "select_features",
    "class_feature_report",
]

__version__ = "0.1.0"
