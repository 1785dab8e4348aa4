"""Differential-hop multi-view preprocessing for attribute-missing graph
clustering."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DataError,
    FormatError,
    HopDiffError,
    InvariantError,
    ParameterError,
    ParseError,
    RangeError,
    ShapeError,
)
from .graph import FeatureMatrix, Graph, LabelVector, load_edge_list, load_features, load_labels, synth_sbm  # noqa: E402
from .neighborhood import DiffHopLayers, bfs_distances, diff_hop_layers, k_hop_neighborhood  # noqa: E402
from .multiview import ViewTensor, aggregate_diff_hop, build_view_tensor, fuse_concat, propagation_views  # noqa: E402
from .imputation import MissingSpec, fp_impute, make_missing_mask, zero_impute  # noqa: E402
from .clustering import ClusterReport, accuracy, ari, kmeans, macro_f1, nmi  # noqa: E402
from .analysis import bench_preprocess, empirical_access_counts, redundancy_ratio  # noqa: E402
