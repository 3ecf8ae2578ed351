"""Nonsymmetric and indefinite Schwarz preconditioners for 1-D IPDG problems."""

from .analysis import (
    AnalysisReport,
    a_norm,
    condition_number_a,
    elman_constants,
    inf_sup_constants,
    operator_a_norm,
    spectrum_report,
)
from .decomposition import (
    Decomposition,
    Partition,
    build_local_solvers,
    build_partition,
    coarse_prolongation,
    subdomain_prolongation,
    two_level,
    verify_decomposition,
)
from .dg import (
    DGSpace,
    DGSystem,
    Mesh1D,
    ProblemConfig,
    assemble,
    assemble_load,
    assemble_stiffness,
    build_mesh,
    error_norms,
    evaluate,
    manufactured,
)
from .krylov import SolveStats, gmres, multiplicative_iterate, preconditioned_solve
from .linalg import LUFactors, Spectrum, eigenvalues, lu_factor, lu_solve, singular_extremes
from .schwarz import SchwarzOperators

__version__ = "0.1.0"
