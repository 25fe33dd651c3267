"""Inexact Newton-Krylov solver with pluggable forcing-term strategies.

The hot CSR kernels live in a compiled extension with a NumPy fallback
selected at import time; see `inewton.linalg.kernel_backend()`.
"""

from .forcing import (
    STRATEGY_LABELS,
    DegenerateHistoryError,
    ForcingConfig,
    ForcingInputs,
    Strategy,
    botti_eta,
    new_choice1_eta,
    new_choice2_eta,
    next_eta,
    p_schedule,
    parse_strategy,
    phi_schedule,
    raw_eta,
    trust_ratio,
)
from .krylov import KrylovConfig, KrylovResult, gmres_solve
from .linalg import (
    CsrMatrix,
    Ilu0Factors,
    ZeroPivotError,
    identity,
    ilu0_apply,
    ilu0_factorize,
    kernel_backend,
    norm2,
    spmv,
)
from .newton import NewtonConfig, NewtonReport, OuterIterRecord, oversolve_probe
from .newton import solve as newton_solve
from .problems import (
    NonlinearProblem,
    NonPhysicalStateWarning,
    TwoPhaseBC,
    bratu2d,
    chandrasekhar_h,
    frac_flow,
    frac_flow_deriv,
    twophase1d,
)
from .timestepping import TransientConfig, TransientReport, run_transient
from .verification import (
    HolderConstants,
    OrderEstimate,
    check_lemma1,
    check_scale_independence,
    errors_from_report,
    estimate_order,
    make_affine_problem,
    make_quadratic_problem,
    synthetic_error_sequence,
)

__version__ = "0.1.0"
