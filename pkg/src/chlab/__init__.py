"""Pseudospectral laboratory for non-uniform-dependence experiments on the
Camassa-Holm equation: spectral operators, a dealiased solver, the
two-part approximate-solution family, and the E1-E5 measurement studies.
"""

from .spectral import (
    ApproxParams,
    BumpSpec,
    Field,
    Grid,
    PHI,
    PHI_TILDE,
    c1_norm,
    ds_apply,
    lambda_inv_apply,
    make_bump,
    make_grid,
    mollify,
    scale_bump,
    sobolev_norm,
    x_derivative,
)
from .dynamics import (
    BlowupError,
    EnergyReport,
    SolverConfig,
    Trajectory,
    ch_rhs,
    energy_monitor,
    lifespan_estimate,
    solve,
    step_rk4,
)
from .family import (
    ApproxSolution,
    ResidualReport,
    build_approx_solution,
    grid_for_lambda,
    high_freq,
    low_freq,
    residual_direct,
    residual_h1,
    residual_terms,
)
from .experiments import (
    ExperimentReport,
    LadderSpec,
    e1_norm_limit,
    e2_residual_decay,
    e3_actual_vs_approx,
    e4_interpolated_hs_decay,
    e5_nonuniform_dependence,
    fit_slope,
)
from .config import ConfigError, RunConfig, parse_config, serialize_config

__version__ = "0.1.0"
