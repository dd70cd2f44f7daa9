"""Spectral clustering with power-iteration embeddings and bound checks.

The pipeline: build a heat-kernel similarity graph, embed points as rows of
the top-k eigenvectors of the normalized adjacency (exactly, or approximately
through seeded power iterations), run k-means on the rows, and score against
ground truth with normalized mutual information.  Exhaustive oracles for both
the graph-cut and the k-means objectives let the approximation guarantees be
verified empirically on small instances.
"""

from .clustering import (
    Clustering,
    IndicatorMatrix,
    KmeansResult,
    bruteforce_kmeans,
    indicator_from_labels,
    kmeans_objective,
    lloyd_kmeans,
    nmi,
)
from .dataio import (
    Dataset,
    RngStream,
    gen_blobs,
    gen_sbm,
    gen_two_rings,
    parse_libsvm,
    serialize_libsvm,
)
from .errors import SpeclustError
from .graph import (
    Bipartition,
    FixedBandwidth,
    SelfTuningBandwidth,
    SimilarityGraph,
    build_graph,
    build_similarity,
    cheeger_bounds,
    connected_components,
    min_ncut_bruteforce,
    ncut,
    rayleigh_ncut,
)
from .linalg import (
    EighResult,
    ThinSvdResult,
    frobenius_norm,
    gram_schmidt,
    jacobi_eigh,
    matmul,
    spectral_norm,
    thin_svd_via_gram,
)
from .spectral import (
    BoundReport,
    Embedding,
    GapReport,
    check_kmeans_bound,
    check_projection_bound,
    eigen_gap,
    exact_embedding,
    iteration_curve,
    power_embedding,
    projection_distance,
    required_iterations,
)

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "BoundReport",
    "Clustering",
    "Dataset",
    "EighResult",
    "Embedding",
    "FixedBandwidth",
    "GapReport",
    "IndicatorMatrix",
    "KmeansResult",
    "RngStream",
    "SelfTuningBandwidth",
    "SimilarityGraph",
    "SpeclustError",
    "ThinSvdResult",
    "bruteforce_kmeans",
    "build_graph",
    "build_similarity",
    "check_kmeans_bound",
    "check_projection_bound",
    "cheeger_bounds",
    "connected_components",
    "eigen_gap",
    "exact_embedding",
    "frobenius_norm",
    "gen_blobs",
    "gen_sbm",
    "gen_two_rings",
    "gram_schmidt",
    "indicator_from_labels",
    "iteration_curve",
    "jacobi_eigh",
    "kmeans_objective",
    "lloyd_kmeans",
    "matmul",
    "min_ncut_bruteforce",
    "ncut",
    "nmi",
    "parse_libsvm",
    "power_embedding",
    "projection_distance",
    "rayleigh_ncut",
    "required_iterations",
    "serialize_libsvm",
    "spectral_norm",
    "thin_svd_via_gram",
]
