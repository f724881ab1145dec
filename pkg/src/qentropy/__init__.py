"""Simulation toolkit for query-charged quantum entropy estimation.

Distributions are exact rational objects served through a counting oracle;
amplitude estimation is replaced by its closed-form outcome law, and every
quantum subroutine charges a query ledger, so estimator bias, variance,
success probability, and query scaling can be measured or enumerated
without any quantum hardware.
"""

from .constants import DEFAULT_CONSTANTS, CostConstants
from .distributions import (
    RationalDistribution,
    from_counts,
    from_json_dict,
    kl_divergence,
    load_distribution,
    min_entropy,
    power_sum,
    renyi_entropy,
    shannon_entropy,
    support_coverage,
)
from .oracle import DistributionOracle, QueryLedger, build_oracle
from .amplitude import (
    EstAmpDistribution,
    estamp_distribution,
    estamp_prime_floor,
    grid_value,
    measurement_probabilities,
)
from .estimators import (
    EstimateReport,
    EstimatorConfig,
    annealing_schedule,
    estimate_kl,
    estimate_min_entropy,
    estimate_power_sum_high,
    estimate_power_sum_integer,
    estimate_power_sum_low,
    estimate_renyi,
    estimate_shannon,
    estimate_support_coverage,
    estimate_support_size,
    exact_expectation,
)

__version__ = "0.1.0"

__all__ = [
    "CostConstants",
    "DEFAULT_CONSTANTS",
    "DistributionOracle",
    "EstAmpDistribution",
    "EstimateReport",
    "EstimatorConfig",
    "QueryLedger",
    "RationalDistribution",
    "annealing_schedule",
    "build_oracle",
    "estamp_distribution",
    "estamp_prime_floor",
    "estimate_kl",
    "estimate_min_entropy",
    "estimate_power_sum_high",
    "estimate_power_sum_integer",
    "estimate_power_sum_low",
    "estimate_renyi",
    "estimate_shannon",
    "estimate_support_coverage",
    "estimate_support_size",
    "exact_expectation",
    "from_counts",
    "from_json_dict",
    "grid_value",
    "kl_divergence",
    "load_distribution",
    "measurement_probabilities",
    "min_entropy",
    "power_sum",
    "renyi_entropy",
    "shannon_entropy",
    "support_coverage",
    "__version__",
]
