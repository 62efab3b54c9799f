"""Rational Krylov solver for the second-order cone linear complementarity problem."""

from .errors import (
    ConeKrylovError,
    DegenerateCenter,
    DimensionMismatch,
    InertiaFailure,
    InvalidParams,
    NoConvergence,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    ParseError,
    SingularShift,
    TooLarge,
    ZeroVector,
)
from .linalg import SymmetricMatrix, as_symmetric, cholesky, ldlt_shifted, orth_extend, sym_eig
from .rksm import (
    Outcome,
    SolveReport,
    SolverOptions,
    classify,
    direct_oracle,
    newton_baseline,
    solve,
)
from .socone import chi_rel, in_cone, j_form, on_boundary

__version__ = "0.1.0"
