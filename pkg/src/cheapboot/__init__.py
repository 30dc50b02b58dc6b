"""Confidence intervals for SGD solutions via cheap bootstrap resampling,
with classical baselines and a Monte Carlo coverage harness."""

from .baselines import (
    BatchLayout,
    HiGradArchitecture,
    batch_layout,
    batch_means_interval,
    default_higrad_architecture,
    delta_interval,
    higrad_interval,
    online_bootstrap_interval,
)
from .cheap import (
    IntervalSet,
    ThreadOutputs,
    cofb,
    conb,
    pivot_statistic,
    resample_with_replacement,
    run_weighted_threads,
)
from .engine import (
    EstimatorRun,
    StepSchedule,
    WeightSource,
    exponential_weights,
    run_trajectory,
)
from .errors import (
    CheapbootError,
    ConfigError,
    DegeneratePivotError,
    DivergenceError,
    EmptyInputError,
    InsufficientDataError,
    InsufficientReplicatesError,
    LayoutError,
    ParameterDomainError,
    SingularMatrixError,
    StepSizeDomainError,
)
from .defaults import default_eta
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    METHODS,
    REPORT_COLUMNS,
    emit_report,
    parse_reports,
    run_cell,
    run_one_trial,
    seed_derive,
    sensitivity_sweep,
    table_configs,
)
from .problems import (
    CovarianceFamily,
    Dataset,
    GroundTruth,
    LinearObjective,
    LogisticObjective,
    Objective,
    Observation,
    estimate_logistic_ground_truth,
    gen_linear,
    gen_logistic,
    load_dataset,
    make_sigma,
    make_x_star,
    objective_for,
    save_dataset,
)
from .stats import (
    AsymptoticCovariance,
    QuantileSpec,
    asgd_asymptotic_cov,
    normal_cdf,
    normal_quantile,
    quantile,
    sample_sd_about_center,
    sample_sd_about_mean,
    sgd_asymptotic_cov,
    t_cdf,
    t_quantile,
    two_sided_multiplier,
)

__version__ = "0.1.0"
