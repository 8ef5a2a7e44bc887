"""Quantum-kernel k-means clustering on a dense statevector simulator."""

from . import _kernels
from .clustering import (
    ClusteringResult,
    classical_kmeans,
    init_centroids,
    kernel_matrix_kmeans,
    quantum_kmeans,
)
from .data import CsvSchema, Dataset, fit_scale, load_csv, select_features
from .evaluation import (
    adjusted_mutual_information,
    adjusted_rand_index,
    evaluate,
    majority_vote,
)
from .feature_maps import FeatureMapConfig, build_circuit, generate_theta
from .kernel import (
    EXACT,
    ShotMode,
    fidelity_exact,
    fidelity_inversion_test,
    kernel_matrix,
    to_distance,
)

__version__ = "0.1.0"
BACKEND = _kernels.name
