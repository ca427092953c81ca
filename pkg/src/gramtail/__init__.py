"""Heavy-tailed size-distribution fitting and phoneme n-gram profiling."""

from .dataset import SizeDataset
from .distributions import (
    CONTINUOUS,
    DISCRETE,
    ModelKind,
    ModelSpec,
    log_likelihood,
    log_pdf,
    mle_fit,
    parameter_count,
    sample,
    tail_cdf,
)
from .fitting import TailFit, bootstrap_gof, fixed_xmin_fit, ks_statistic, scan_xmin
from .selection import (
    ComparisonReport,
    aic,
    compare_all,
    compare_at,
    likelihood_ratio_test,
)
from .experiments import growth_curves, random_sample_experiment, rank_regression

__version__ = "0.1.0"

__all__ = [
    "SizeDataset",
    "CONTINUOUS",
    "DISCRETE",
    "ModelKind",
    "ModelSpec",
    "log_pdf",
    "tail_cdf",
    "log_likelihood",
    "mle_fit",
    "sample",
    "parameter_count",
    "TailFit",
    "ks_statistic",
    "scan_xmin",
    "fixed_xmin_fit",
    "bootstrap_gof",
    "aic",
    "likelihood_ratio_test",
    "compare_all",
    "compare_at",
    "ComparisonReport",
    "rank_regression",
    "random_sample_experiment",
    "growth_curves",
    "__version__",
]
