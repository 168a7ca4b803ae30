"""Trial generalization with omitted-variable-bias sensitivity analysis.

The package estimates how a randomized trial's treatment effect transports
to a target population described only by covariates, and quantifies how far
that transported estimate could be from the truth if an unobserved effect
modifier is distributed differently between the two populations.
"""

__version__ = "0.1.0"

from .benchmark import benchmark_table, effect_partial_r2, selection_partial_r2
from .model import (
    BenchmarkEntry,
    EstimatorMethod,
    PooledDesign,
    SensitivityParamsR2,
    SensitivityParamsRaw,
    SensitivityReport,
    TargetDataset,
    TransportEstimate,
    TrialDataset,
    pool,
    validate_ingest,
)
from .sensitivity import (
    ContourGrid,
    SigmaTauEstimate,
    SigmaTauMode,
    contour_grid,
    inflate_interval,
    r2_bias_bound,
    raw_bias_bound,
    robustness_value,
    sigma_tau_upper,
)
from .simulate import (
    CoverageCurve,
    Dgp1Config,
    Dgp2Config,
    Dgp3Config,
    DgpOracle,
    HideOneConfig,
    coverage_experiment,
    gen_dgp1,
    gen_dgp2,
    gen_dgp3,
    hide_one_benchmark,
)
from .transport import (
    OutcomeModels,
    bootstrap_ci,
    fit_outcome_models,
    gformula_tate,
    ipw_tate,
    sate,
)
