"""Numerical toolkit for the quadratic-interaction inhomogeneous NLS system."""
from .classify import (
    Verdict,
    blowup_threshold_check,
    classify_state,
    global_threshold_check,
    regime,
    stability_criterion,
)
from .evolution import (
    EvolveConfig,
    Trajectory,
    blowup_monitor,
    default_dt,
    evolve,
    scattering_diagnostics,
    strang_step,
    verify_virial_chain,
)
from .exceptions import (
    ConfigError,
    DomainTooSmall,
    GridError,
    InlsError,
    InvalidFrequency,
    NonFinite,
    NonpositiveP,
    NotConverged,
    NoZeroCrossing,
    ParameterError,
    ParamsMismatch,
    TailBelowFloor,
    ZeroState,
)
from .functionals import (
    action_nehari,
    invariants,
    localized_mass,
    make_cutoff,
    virial_moment,
    virial_rate,
    weinstein,
)
from .grid import FieldPair, Grid, PhysParams, build_grid, gaussian_pair, integrate, laplacian
from .ground_state import (
    GroundStateResult,
    NehariGroundState,
    alpha_limit,
    compute_d_minus,
    decay_fit,
    gn_constant,
    gn_crosscheck,
    minimize_nehari,
    mountain_pass_level,
    pohozaev_residuals,
    scalar_Q,
)

__version__ = "0.1.0"
