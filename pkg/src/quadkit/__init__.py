"""quadkit: quadrature rules, stable polynomial least squares, and
near-optimal point subselection."""

from .orthopoly import (
    DesignMatrix,
    MultiIndexSet,
    RecurrenceTable,
    design_matrix,
    evaluate_basis,
    evaluate_orthonormal,
    multi_index_set,
    recurrence_coefficients,
)
from .quadrature import (
    QuadratureRule,
    SparseGridSpec,
    clenshaw_curtis,
    gauss_lobatto,
    golub_welsch,
    pseudospectral_coefficients,
    sparse_grid,
    stieltjes_discretized,
    tensor_grid,
)
from .sampling import SampleSet, christoffel_sample, monte_carlo_sample, sample_weights
from .subselect import (
    MomentWeights,
    Selection,
    greedy_det_subselect,
    lu_subselect,
    newton_subselect,
    nnls_weights,
    qr_subselect,
    svd_subselect,
)
from .diagnostics import (
    GramReport,
    condition_number,
    gram_report,
    moments,
    solve_least_squares,
)

__version__ = "0.1.0"

__all__ = [
    "DesignMatrix", "MultiIndexSet", "RecurrenceTable", "design_matrix",
    "evaluate_basis", "evaluate_orthonormal", "multi_index_set",
    "recurrence_coefficients",
    "QuadratureRule", "SparseGridSpec", "clenshaw_curtis", "gauss_lobatto",
    "golub_welsch", "pseudospectral_coefficients", "sparse_grid",
    "stieltjes_discretized", "tensor_grid",
    "SampleSet", "christoffel_sample", "monte_carlo_sample", "sample_weights",
    "MomentWeights", "Selection", "greedy_det_subselect", "lu_subselect",
    "newton_subselect", "nnls_weights", "qr_subselect", "svd_subselect",
    "GramReport", "condition_number", "gram_report", "moments",
    "solve_least_squares",
]
