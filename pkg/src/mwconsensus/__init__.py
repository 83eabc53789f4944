"""Matrix-weighted consensus: Laplacian analysis, cluster detection and simulation."""
from .bearing import BearingSpec, bearing_laplacian, formation_converges_to, projection_weight
from .clustering import (
    ClusterPartition,
    enumerate_paths,
    find_clusters,
    merge_by_edge_sum,
    path_nullspace,
    positive_tree_partition,
    predict_consensus,
    vertex_joins_cluster,
)
from .dynamics import (
    SimulationConfig,
    Trajectory,
    check_average_invariance,
    detect_clusters_from_states,
    measure_decay_rate,
    simulate,
    verify_equilibrium_constraints,
)
from .graph import (
    EdgeKind,
    MatrixWeight,
    MatrixWeightedGraph,
    adjacency_matrix,
    build_graph,
    classify_edge,
    incidence_matrix,
    laplacian,
    laplacian_from_incidence,
    quadratic_form,
)
from .spectral import SpectralReport, analyze_spectrum, convergence_rate, laplacian_nullspace
from .subspace import Subspace, nullspace_of

__version__ = "0.1.0"
