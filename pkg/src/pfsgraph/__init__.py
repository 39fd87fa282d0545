"""Local graph estimation around target variables via pathwise feature selection."""

from .data import BINARY, CONTINUOUS, DataMatrix, make_data_matrix
from .errors import (
    ConvergenceError,
    DegenerateResponseError,
    DegenerateSignalError,
    EstimationError,
    GenerationError,
    IngestError,
    PfsGraphError,
    TooFewSamplesError,
)
from .evaluate import (
    EvalReport,
    StudyConfig,
    audit_path_bound,
    default_pfs_config,
    glasso_isolation_lambda,
    nodewise_lasso_baseline,
    run_study,
)
from .export import export_graph, load_estimate, save_estimate
from .graphs import (
    LocalGraphEstimate,
    Path,
    QMatrix,
    TrueGraph,
    ball,
    lightest_path_distance,
    local_edge_set,
    local_fdp,
    local_tpr,
    path_qsum,
    prune,
)
from .ingest import IngestSpec, ingest, read_dataset, write_dataset
from .pfs import NodeThresholds, PfsConfig, next_layer, record_edge, run_pfs
from .qvalues import (
    EfpQVector,
    EstimatorConfig,
    SelectionProfile,
    efp_scores,
    estimate_neighbor_qvalues,
    qvalues_from_efp,
    regularization_grid,
    selection_profile,
    soft_threshold_solve,
    tree_importance_profile,
)
from .simulate import (
    PrecisionSpec,
    SimulatedInstance,
    apply_nonlinear_response,
    generate_instance,
    graph_from_precision,
    make_precision,
    sample_gaussian,
)

__version__ = "0.1.0"
