"""Experimental and theoretical error budgets and confidence-band comparisons
for precision force and pressure measurements."""

__version__ = "0.1.0"

from .binning import (  # noqa: E402
    SubintervalGroup,
    bin_mean_and_variance,
    partition_into_subintervals,
    pointwise_mean_and_variance,
)
from .comparison import ComparisonVerdict, difference_error, mean_difference, verdict  # noqa: E402
from .composition import (  # noqa: E402
    SystematicSource,
    combine_random_systematic,
    combine_systematic,
    evaluate_systematic_sources,
)
from .data_model import (  # noqa: E402
    CoefficientTables,
    ExperimentConfig,
    InputError,
    MeasurementCollection,
    QuantityKind,
    TheoryCurve,
    interpolate_theory,
    load_config,
    load_measurement_sets,
    load_theory_curves,
)
from .random_error import build_windows, random_error, smooth_variance  # noqa: E402
from .tdist import student_t_quantile  # noqa: E402
from .theory_error import (  # noqa: E402
    base_theory_error,
    pfa_error,
    separation_uncertainty_error,
    total_theory_error,
)
