"""Projected and modulus-based matrix-splitting solvers for LCP(sigma, A)."""

from .convergence import (
    ConvergenceCertificate,
    ModeUnsupportedError,
    certify_rho_lt_one,
    check_hmatrix_conditions,
    check_spectral_condition,
    iteration_operator_rho,
)
from .matrix_core import (
    ClassificationReport,
    DluParts,
    SingularMatrixError,
    SparseMatrix,
    classify,
    comparison_matrix,
    dlu_split,
    lower_triangular_solve,
    read_matrix_market,
    read_vector,
    spectral_radius_nonneg,
    write_matrix_market,
    write_vector,
)
from .problems import (
    BenchSpec,
    gen_example1,
    gen_example2,
    gen_random_hplus,
    oracle_solutions,
    oracle_solve,
)
from .solvers import (
    DivergenceError,
    LcpProblem,
    ModulusConfig,
    SolveReport,
    SolverConfig,
    alternating_initial,
    alternating_solution,
    modulus_solve,
    projected_solve,
    residual,
)
from .splittings import (
    Splitting,
    SplittingAnalysis,
    SplittingKind,
    analyze_splitting,
    custom_splitting,
    make_splitting,
)

__version__ = "0.1.0"

__all__ = [
    "BenchSpec",
    "ClassificationReport",
    "ConvergenceCertificate",
    "DivergenceError",
    "DluParts",
    "LcpProblem",
    "ModeUnsupportedError",
    "ModulusConfig",
    "SingularMatrixError",
    "SolveReport",
    "SolverConfig",
    "SparseMatrix",
    "Splitting",
    "SplittingAnalysis",
    "SplittingKind",
    "alternating_initial",
    "alternating_solution",
    "analyze_splitting",
    "certify_rho_lt_one",
    "check_hmatrix_conditions",
    "check_spectral_condition",
    "classify",
    "comparison_matrix",
    "custom_splitting",
    "dlu_split",
    "gen_example1",
    "gen_example2",
    "gen_random_hplus",
    "iteration_operator_rho",
    "lower_triangular_solve",
    "make_splitting",
    "modulus_solve",
    "oracle_solutions",
    "oracle_solve",
    "projected_solve",
    "read_matrix_market",
    "read_vector",
    "residual",
    "spectral_radius_nonneg",
    "write_matrix_market",
    "write_vector",
]
