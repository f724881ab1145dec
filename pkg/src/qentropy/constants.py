"""All tunable constants hidden behind the estimators' Theta(.) expressions.

One frozen record collects every calibration knob so experiments can report
exactly which constants produced a number.  Defaults were calibrated on the
acceptance grids (see README); change them through EstimatorConfig, not here.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CostConstants:
    # Multiplier on every charged execution count of the mean-estimation
    # theorems (the constant swallowed by their O(.)).
    c_quantum: int = 1

    # Classical realization of the additive mean estimator: median of
    # `additive_groups` groups, each of ceil(c_classical * (sigma/eps)^2)
    # runs.  c_classical = 5 makes each group fail with probability <= 1/5
    # by Chebyshev; the median of three pushes the total below 1/5.
    c_classical: float = 5.0
    additive_groups: int = 3

    # Classical realization of the bounded-second-moment estimator: one
    # Chebyshev group sized for failure <= 1/50, second moment taken from a
    # pilot run with a two-sided safety factor.
    lemma_chebyshev: float = 50.0
    pilot_runs: int = 64
    pilot_safety: float = 2.0

    # Repetition count ceil(median_constant * ln(1/delta)) for median
    # amplification of a >= 2/3 success estimator to 1 - delta.
    median_constant: int = 48

    # Extra doublings of the power-of-two phase-estimation budgets, fixed so
    # the exact estimator bias meets its budget on the acceptance grids.
    shannon_m_shift: int = 1
    kl_m_shift: int = 1
    coverage_m_shift: int = 1

    # K in the integer-order power-sum estimator's round count ceil(K/eps^2).
    collision_rounds_constant: float = 8.0

    # Scale constant applied by every distinctness cost-model preset.
    distinctness_scale: float = 1.0


DEFAULT_CONSTANTS = CostConstants()
