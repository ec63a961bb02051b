"""Gradient-based adaptive stochastic search for black-box maximization.

The optimizer samples candidate solutions from an independent Gaussian,
scores them with a quantile-pruning shape transform, and follows a
preconditioned stochastic ascent direction on the distribution's natural
parameters.  The package also ships the ten-problem benchmark set, a
replicated-experiment harness with CSV export, numerical self-checks, and
a command-line front end (``gass``).
"""

from .gaussian import (
    MeanMoments,
    NaturalParam,
    analytic_var_T,
    expected_T,
    from_moments,
    log_density,
    sample,
    sufficient_statistics,
    to_moments,
)
from .shaping import (
    BatchMinBound,
    FixedBound,
    ShapeSpec,
    WeightedValues,
    normalize_weights,
    resolve_lower_bound,
    sample_quantile,
    shape_values,
    weigh_batch,
)
from .engine import (
    ALGORITHMS,
    EngineConfig,
    EngineState,
    ProjectionBox,
    SampleBatch,
    Schedules,
    TrialReport,
    ascent_direction,
    estimate_Ep,
    estimate_var_T,
    modified_ce_gain,
    project,
    run,
    running_mean_update,
    step_gass,
    step_gass_avg,
    step_modified_ce,
)
from .benchmarks import (
    PROBLEM_NAMES,
    Problem,
    evaluate_batch,
    get_problem,
    reduced_dimension,
)
from .harness import (
    AggregateRow,
    ExperimentPlan,
    aggregate,
    export_results,
    load_results,
    run_experiment,
)
from . import diagnostics

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AggregateRow",
    "BatchMinBound",
    "EngineConfig",
    "EngineState",
    "ExperimentPlan",
    "FixedBound",
    "MeanMoments",
    "NaturalParam",
    "PROBLEM_NAMES",
    "Problem",
    "ProjectionBox",
    "SampleBatch",
    "Schedules",
    "ShapeSpec",
    "TrialReport",
    "WeightedValues",
    "aggregate",
    "analytic_var_T",
    "ascent_direction",
    "diagnostics",
    "estimate_Ep",
    "estimate_var_T",
    "evaluate_batch",
    "expected_T",
    "export_results",
    "from_moments",
    "get_problem",
    "load_results",
    "log_density",
    "modified_ce_gain",
    "normalize_weights",
    "project",
    "reduced_dimension",
    "resolve_lower_bound",
    "run",
    "run_experiment",
    "running_mean_update",
    "sample",
    "sample_quantile",
    "shape_values",
    "step_gass",
    "step_gass_avg",
    "step_modified_ce",
    "sufficient_statistics",
    "to_moments",
    "weigh_batch",
]
