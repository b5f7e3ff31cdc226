"""Conditioning of preconditioned data assimilation Hessians.

Numerical toolkit for building correlated error covariance matrices on the
periodic unit-circle grid, assembling the preconditioned and
unpreconditioned 3D-Var Hessians, bounding and computing their condition
numbers, and measuring conjugate-gradient convergence.
"""

__version__ = "0.1.0"

from .errors import NotPositiveDefiniteError, SolverError
from .covariance import (
    CircleGrid,
    CirculantSpec,
    CorrelationMatrix,
    build_soar,
    circulant_eigenvalues,
    circulant_from_first_row,
    inverse_symmetric_sqrt,
    spd_inverse,
    symmetric_sqrt,
)
from .obs_operators import (
    CANONICAL_KINDS,
    ObservationOperator,
    apply,
    apply_transpose,
    gram,
    make_operator,
    operator_from_json,
)
from .hessian import (
    HessianModel,
    SpectrumReport,
    assemble_preconditioned,
    assemble_unpreconditioned,
    kappa_via_rank_p,
    preconditioned_operator,
    spectrum,
    update_eigenvalues,
)
from .bounds import (
    BoundsReport,
    ExactnessDiagnostics,
    check_circulant_exactness,
    compute_bounds_report,
    factored_bounds,
    general_bounds,
    haben_bounds,
)
from .solvers import (
    CGRunReport,
    SignalDescriptor,
    TestSignal,
    conjugate_gradient,
    make_test_signal,
    symmetric_eigendecomposition,
)
from .experiments import (
    DEFAULT_GRID,
    TABLE1_LENGTHSCALES,
    SweepConfig,
    config_from_json,
    run_bounds_sweep,
    run_cg_sweep,
    run_condition_sweep,
    run_spectrum_export,
    run_table1,
)

__all__ = [
    "__version__",
    "NotPositiveDefiniteError",
    "SolverError",
    "CircleGrid",
    "CirculantSpec",
    "CorrelationMatrix",
    "build_soar",
    "circulant_eigenvalues",
    "circulant_from_first_row",
    "inverse_symmetric_sqrt",
    "spd_inverse",
    "symmetric_sqrt",
    "CANONICAL_KINDS",
    "ObservationOperator",
    "apply",
    "apply_transpose",
    "gram",
    "make_operator",
    "operator_from_json",
    "HessianModel",
    "SpectrumReport",
    "assemble_preconditioned",
    "assemble_unpreconditioned",
    "kappa_via_rank_p",
    "preconditioned_operator",
    "spectrum",
    "update_eigenvalues",
    "BoundsReport",
    "ExactnessDiagnostics",
    "check_circulant_exactness",
    "compute_bounds_report",
    "factored_bounds",
    "general_bounds",
    "haben_bounds",
    "CGRunReport",
    "SignalDescriptor",
    "TestSignal",
    "conjugate_gradient",
    "make_test_signal",
    "symmetric_eigendecomposition",
    "DEFAULT_GRID",
    "TABLE1_LENGTHSCALES",
    "SweepConfig",
    "config_from_json",
    "run_bounds_sweep",
    "run_cg_sweep",
    "run_condition_sweep",
    "run_spectrum_export",
    "run_table1",
]
