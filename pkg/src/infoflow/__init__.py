"""Numerical engine for entropy, Fisher information, score functions,
conditional-expectation operators and maximal correlation of sums of
i.i.d. random variables, with Monte Carlo cross-checks and verification
suites for the monotonicity and contraction identities."""

from .battery import BatteryEntry, default_battery, spec_by_name
from .correlation import (
    CondExpKernel,
    GridFunction,
    MaxCorrResult,
    build_kernel,
    cond_exp,
    contraction_ratio,
    maximal_correlation,
    verify_score_projection,
)
from .errors import *  # noqa: F401,F403
from .functionals import (
    GAUSSIAN_ENTROPY,
    FunctionalReport,
    ScoreField,
    entropy,
    fisher_information,
    moments,
    report,
    score,
    standardized_sum,
)
from .grids import (
    AffineForm,
    DistributionSpec,
    GridDensity,
    GridPolicy,
    GridSpec,
    IidSumFamily,
    build_family,
    convolve,
    family_grid,
    load_tabulated,
    make_density,
    normalize,
    ou_evolve,
    refined_sum_density,
    rescale,
    restrict,
    translate,
    trapezoid,
)
from .montecarlo import (
    GENERATOR,
    EstimateWithCI,
    SampleSet,
    mc_entropy,
    mc_fisher,
    mc_maxcorr,
    sample,
    sample_sum_pair,
)
from .semigroup import (
    FlowSchedule,
    FlowTrace,
    debruijn_gap,
    family_fisher_flow,
    fisher_along_flow,
    geometric_schedule,
    monotonicity_via_flow,
)
from .verify import CheckResult, SuiteVerdict, run_verify

__version__ = "0.1.0"
