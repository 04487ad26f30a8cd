"""Weighted and adaptive kNN classification under posterior drift."""

from .adaptive import (
    AdaptiveSelection,
    adaptive_multi_source,
    adaptive_single_source,
    adaptive_two_source,
    attempt_count,
    signal_to_noise_r,
    stopping_threshold,
)
from .estimators import TuningPlan, WeightedEstimate, fixed_weighted_knn, knn_regress, plug_in_classify, rate_optimal_tuning, weighted_posterior
from .geometry import LabeledSample, NeighborList, SourceDataset, euclidean_distance, k_nearest
from .synth import DgpConfig, bayes_label, eta, sample_dataset
from .theory import MultiSourceParams, RateParams, Regime

__version__ = "0.1.0"
