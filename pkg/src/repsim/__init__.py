"""CCA-based representational similarity for neural network layers.

Activation matrices are 2-D arrays with one row per neuron and one column
per datapoint.
"""
from .cca import CcaResult, compute_cca, svcca_preprocess
from .similarity import (
    DistanceReport,
    bartlett_cca_distance,
    bartlett_statistic,
    cosine_distance,
    distance,
    estimate_significant_correlations,
    euclidean_distance,
    mean_cca_distance,
    projection_weights,
    pwcca_distance,
    svcca_distance,
)
from .dynamics import (
    CheckpointSeries,
    SubspaceSplit,
    coefficient_trajectories,
    convergence_curve,
    group_by_sequence_step,
    split_stable_unstable,
    stability_curves,
    subspace_similarity,
)
from .analysis import DistanceMatrix, agglomerative_cluster, pairwise_distance_matrix, pearson_correlation
from .fileio import load_activations, save_activations

__version__ = "0.1.0"
