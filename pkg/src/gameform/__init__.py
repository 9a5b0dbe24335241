"""Differential game forms of two-player zero-sum continuous games.

A zero-sum game is given by a single smooth cost ``f(x1, x2)``; player 1
minimizes it in ``x1`` and player 2 maximizes it in ``x2``.  The package
computes the game form ``omega = (D1 f, -D2 f)`` and its Jacobian, finds and
classifies critical points, simulates gradient play, and checks the
persistence and genericity of differential Nash equilibria numerically.
"""

from .classify import (
    CriticalPointReport,
    MultistartResult,
    NewtonOptions,
    NewtonResult,
    Tolerances,
    classify_point,
    multistart,
    newton_find,
)
from .dynamics import (
    StepSizes,
    Trajectory,
    flow_rk4,
    gradient_play_discrete,
    time_average_observable,
    write_trajectory_csv,
)
from .errors import (
    ConfigError,
    CorrectorFailed,
    DimensionMismatch,
    GameformError,
    NoConvergence,
    NonFiniteEncountered,
    NotSymmetric,
    NumericalOverflow,
    PreconditionError,
    SingularMatrix,
)
from .form import block_hessians, full_hessian, game_jacobian, omega, omega_and_jacobian, p_matrix
from .games import (
    Bilinear,
    BlockDims,
    Composite,
    JointPoint,
    PerturbedBilinear,
    Polynomial,
    PolyTerm,
    QuadraticSaddle,
    RpsSoftmax,
    emit_game_config,
    evaluate,
    game_from_dict,
    game_to_dict,
    gradient,
    jet2,
    parse_game_config,
    random_polynomial,
    rps_policy,
)
from .perturb import (
    ContinuationPath,
    GenericityStats,
    MultistartSpec,
    continuation,
    genericity_sample,
    sample_game,
    structural_stability_check,
)
from .spectra import Definiteness, DefinitenessVerdict, Spectrum, determinant, eigenvalues, sym_definiteness

__version__ = "0.1.0"
