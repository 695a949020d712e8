from ._core import (
    DEFAULT_JITTER,
    Boundary,
    BoundaryConfig,
    ConditioningError,
    ConfigError,
    DegenerateConfiguration,
    DomainError,
    Emulator,
    EmulatorInconsistency,
    Error,
    InvalidParameter,
    MisuseError,
    ModelEvaluationError,
    NumericalConsistencyError,
    NumericalError,
    Prior,
    ShapeError,
    StiffnessError,
    arabidopsis,
    augmented_points,
    brute_force_update,
    corr_1d,
    criterion_grid,
    greedy_v_optimal,
    latin_hypercube,
    maximin_lhc,
    min_pairwise_distance,
    rmse,
    run_study,
    sobol_pool,
    standardized_errors,
    toy,
    updated_corr_component,
    v_criterion,
    warp_design,
    warp_integral,
)

__version__ = "0.1.0"
