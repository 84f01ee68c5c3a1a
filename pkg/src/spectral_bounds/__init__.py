"""Eigenvalue bounds for symmetric definite pencils ``K x = lambda M x``.

Ritz-type inner bounds, Lehmann inclusion intervals about a shift, their
bordered (Kahan) and relaxed (Goerisch) forms, and Lanczos-based
convergence experiments.
"""

from .errors import (
    BadKappa,
    BadOmega,
    BadShift,
    BadSplit,
    DimensionMismatch,
    IndefiniteRightSide,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    ShiftAtEigenvalue,
    ShiftAtRitzValue,
    SingularK,
    SingularShiftedMatrix,
    SpectralBoundsError,
    WrongSide,
    ZeroStartVector,
)
from .kahan import (
    BlockLanczosData,
    GoerischW,
    block_lanczos_step,
    bordered_left_pencil,
    exact_w,
    goerisch_left,
    goerisch_w,
    inexact_solve,
    kahan_left,
    kahan_right,
)
from .lanczos import (
    ConvergenceHistory,
    HistoryConfig,
    LanczosFactorization,
    bauer_fike_check,
    certified_kappa,
    convergence_history,
    exact_omega,
    ends_config,
    interior_config,
    lanczos,
    omega_from_kappa,
    shift_invert_ritz,
    tridiagonal_lehmann,
)
from .lehmann import (
    InclusionStatement,
    ShiftedBounds,
    inclusion_intervals,
    left_lehmann,
    left_right_compare,
    limit_consistency,
    right_lehmann,
    temple,
)
from .matrix_market import MatrixMarketError, read_matrix_market
from .pencil import (
    EdgeLabeledValues,
    Inertia,
    Pencil,
    SchwarzMatrices,
    check_basis,
    count_below,
    g_matrix,
    inertia,
    j_matrices,
    m_orthonormalize,
    schwarz_matrices,
    solve_definite_gep,
)
from .ritz import (
    RitzResult,
    dual_harmonic_ritz,
    harmonic_ritz,
    optimality_witness,
    ritz,
)

__version__ = "0.1.0"
