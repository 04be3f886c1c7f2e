"""Link-level laboratory for massive-MIMO M-PAM transmission under imperfect
channel knowledge: a seeded Monte Carlo simulator, deterministic large-system
performance predictors, and pilot/data resource optimizers."""

from .allocation import (
    AllocationResult,
    MonotonicityReport,
    alpha_star,
    alpha_star_for_config,
    goodput_grid,
    optimize_goodput,
    verify_monotone_mse_sep,
)
from .asymptotics import (
    BoxObjectiveParams,
    Prediction,
    ScalarSolution,
    box_objective,
    box_saddle_solve,
    box_sep,
    box_theta_min,
    gauss_pdf,
    gaussian_partial_second_moment,
    lambda_star_numeric,
    lambda_star_rls,
    ls_mse,
    ls_sep,
    mse_from_theta,
    mse_rls_opt_lambda,
    predict,
    qfunc,
    rls_beta_star,
    rls_sep,
    rls_stationarity_residuals,
    rls_theta_star,
    scalar_solution,
    t_star_numeric,
    upsilon,
)
from .decoders import (
    DecodeRequest,
    DecodeResult,
    DecoderKind,
    DecoderSpec,
    box_rls_solve,
    decode,
    lmmse_decode,
    normalize_and_slice,
    rls_solve,
)
from .errors import ConfigError, ConvergenceError, DegenerateThresholdError, InfeasibleError
from .runner import (
    CSV_COLUMNS,
    LambdaPolicy,
    RunResult,
    SweepAxis,
    SweepRecord,
    SweepSpec,
    TPolicy,
    load_config,
    records_to_csv,
    resolve_decoder,
    run,
    write_config,
)
from .simulate import (
    BatchStats,
    ChannelRealization,
    PilotBlock,
    TrialOutcome,
    aggregate,
    estimate_channel,
    make_pilots,
    run_batch,
    run_trial,
    trial_stream,
)
from .system import (
    Constellation,
    DerivedParams,
    PowerConvention,
    SystemConfig,
    db_to_linear,
    derive_params,
    linear_to_db,
    pam_constellation,
    rho_eff_of_alpha,
    slice_symbols,
)

__version__ = "0.1.0"
