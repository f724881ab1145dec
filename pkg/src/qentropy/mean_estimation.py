"""Quantum mean-estimation contracts, simulated classically.

The quantum results being modeled promise a mean estimate of a subroutine's
output from L executions, where L scales near-linearly in sigma/epsilon
rather than the classical (sigma/epsilon)^2.  This module realizes each
contract's statistical guarantee with classical sampling while the ledger is
charged the quantum execution count:

  * additive:        |est - E[X]| <= eps   w.p. >= 4/5,  var[X] <= sigma^2
  * bounded-l2:      |est - E[X]| <= eps*(sqrt(E[X^2])+1)^2  w.p. >= 49/50
  * multiplicative:  |est - E[X]| <= eps*E[X]  w.p. >= 9/10,
                     var[X] <= sigma^2*E[X]^2, E[X] in [a, b]

The multiplicative estimator follows the textbook decomposition: scale by
1/(sigma*b), subtract a single-run anchor m~, split the residual into its
negative and positive parts, estimate each part's small mean with the
bounded-l2 contract at error eps*a/(48*sigma*b), and reassemble as
sigma*b*(m~ - 6*mu_- + 6*mu_+).

Charged executions are c_quantum * ceil(r * ln(r)^1.5 * ln(ln(r))) at the
contract's ratio r, floored at one execution.  Out-of-contract parameters
(eps too large for the theorem's range) still run but are flagged.

Subroutines with finite support expose their outcome atoms; sample means
over such a subroutine are computed by drawing the multinomial vector of
outcome counts, which costs O(#atoms) regardless of the sample size.  The
classical-execution ledger still records the full notional sample count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_CONSTANTS, CostConstants
from .oracle import QueryLedger

# Largest batch materialized at once; bigger requests stream in chunks.
_CHUNK = 1 << 20


class Subroutine:
    """A randomized subroutine X whose mean is being estimated.

    Implementations provide vectorized draws via batch(); draws represent
    classical simulation work and are recorded as such on the attached
    ledgers.  `charges` lists (ledger, phase, per_execution_queries) triples;
    the mean estimators multiply the per-execution query costs by the
    theorem's execution count and charge them wholesale.
    """

    charges: tuple[tuple[QueryLedger, str, int], ...] = ()

    def draw(self, count: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _record_classical(self, count: int) -> None:
        for ledger, _, _ in self.charges:
            ledger.charge_classical(count)

    def batch(self, count: int, rng: np.random.Generator) -> np.ndarray:
        out = self.draw(count, rng)
        self._record_classical(count)
        return out

    def moment_sums(self, count: int, rng: np.random.Generator) -> tuple[float, float]:
        """Sum and sum of squares over `count` draws, recorded as classical work."""
        total = 0.0
        total_sq = 0.0
        done = 0
        while done < count:
            step = min(_CHUNK, count - done)
            x = self.draw(step, rng)
            total += float(x.sum())
            total_sq += float(x @ x)
            done += step
        self._record_classical(count)
        return total, total_sq

    def charge_quantum(self, executions: int) -> None:
        for ledger, phase, per_execution in self.charges:
            ledger.charge(phase, per_execution * executions)


class CategoricalSubroutine(Subroutine):
    """Subroutine over finitely many outcome atoms with known probabilities.

    Sample moments come from one multinomial draw over the atoms, so huge
    Chebyshev sample sizes cost O(#atoms) work instead of O(#samples).
    """

    def __init__(self, values, probabilities,
                 charges: tuple[tuple[QueryLedger, str, int], ...] = ()):
        self.values = np.asarray(values, dtype=np.float64)
        self.probabilities = np.asarray(probabilities, dtype=np.float64)
        if self.values.shape != self.probabilities.shape:
            raise ValueError("values and probabilities must align")
        if np.any(self.probabilities < 0):
            raise ValueError("probabilities must be non-negative")
        total = self.probabilities.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        # exact-sum normalization keeps multinomial's validation happy
        self._pvals = self.probabilities / total
        self._cum = np.cumsum(self._pvals)
        self.charges = tuple(charges)

    def draw(self, count, rng):
        idx = np.searchsorted(self._cum, rng.random(count), side="right")
        return self.values[np.minimum(idx, len(self.values) - 1)]

    def moment_sums(self, count, rng):
        counts = rng.multinomial(count, self._pvals)
        self._record_classical(count)
        return float(counts @ self.values), float(counts @ self.values ** 2)

    def mean(self) -> float:
        return float(self.values @ self.probabilities)

    def variance(self) -> float:
        m = self.mean()
        return float((self.values - m) ** 2 @ self.probabilities)


class SyntheticSubroutine(CategoricalSubroutine):
    """Finite-support test subroutine with known mean and variance."""

    def __init__(self, values, probabilities, ledger: QueryLedger | None = None,
                 phase: str = "mean-estimation", per_execution: int = 1):
        charges = ((ledger, phase, per_execution),) if ledger is not None else ()
        super().__init__(values, probabilities, charges)


class _ResidualPart(Subroutine):
    """max(sign*(X/scale - anchor), 0) / 6 for the multiplicative split.

    Shares the base subroutine's ledgers for classical recording; never call
    charge_quantum on a part, the caller's own theorem count covers it.
    """

    def __init__(self, base: Subroutine, scale: float, anchor: float, sign: float):
        self.base = base
        self.scale = scale
        self.anchor = anchor
        self.sign = sign
        self.charges = base.charges
        if isinstance(base, CategoricalSubroutine):
            self._atom_values = self._transform(base.values)
            self._atom_pvals = base._pvals
        else:
            self._atom_values = None
            self._atom_pvals = None

    def _transform(self, x):
        return np.maximum(self.sign * (x / self.scale - self.anchor), 0.0) / 6.0

    def draw(self, count, rng):
        return self._transform(self.base.draw(count, rng))

    def moment_sums(self, count, rng):
        if self._atom_values is None:
            return super().moment_sums(count, rng)
        counts = rng.multinomial(count, self._atom_pvals)
        self._record_classical(count)
        return float(counts @ self._atom_values), float(counts @ self._atom_values ** 2)


@dataclass
class MeanEstimate:
    value: float
    charged_executions: int
    classical_executions: int
    mode: str
    out_of_contract: bool = False
    details: dict = field(default_factory=dict)


def theorem_execution_count(ratio: float, c_quantum: int = 1) -> int:
    """c_quantum * ceil(r * ln(r)^{3/2} * ln(ln(r))), floored at one execution."""
    if ratio > math.e:
        core = ratio * math.log(ratio) ** 1.5 * math.log(math.log(ratio))
    else:
        core = 0.0
    return c_quantum * max(1, math.ceil(core))


def qmean_additive(
    sub: Subroutine,
    sigma: float,
    epsilon: float,
    rng: np.random.Generator,
    constants: CostConstants = DEFAULT_CONSTANTS,
) -> MeanEstimate:
    """Additive-error mean estimate: |est - E[X]| <= epsilon w.p. >= 4/5.

    Requires var[X] <= sigma^2 and, for the charged cost to be meaningful,
    0 < epsilon < 4*sigma.  Classically runs a median of group means sized by
    Chebyshev; the ledger is charged the near-linear theorem cost.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    out_of_contract = not (epsilon < 4.0 * sigma)
    charged = theorem_execution_count(sigma / epsilon, constants.c_quantum)

    groups = constants.additive_groups
    group_size = max(1, math.ceil(constants.c_classical * (sigma / epsilon) ** 2))
    means = []
    for _ in range(groups):
        total, _ = sub.moment_sums(group_size, rng)
        means.append(total / group_size)
    value = float(np.median(means))

    sub.charge_quantum(charged)
    return MeanEstimate(
        value=value,
        charged_executions=charged,
        classical_executions=groups * group_size,
        mode="additive",
        out_of_contract=out_of_contract,
    )


def bounded_l2_estimate(
    sub: Subroutine,
    epsilon: float,
    rng: np.random.Generator,
    constants: CostConstants = DEFAULT_CONSTANTS,
    charge: bool = True,
) -> MeanEstimate:
    """Mean estimate with error epsilon*(sqrt(E[X^2])+1)^2 w.p. >= 49/50.

    The unknown second moment is estimated on a pilot run and widened by
    pilot_safety in both directions: the lower value sets the error target
    actually enforced (never above the contract's allowance, which is at
    least epsilon since (sqrt(.)+1)^2 >= 1), the upper value bounds the
    variance for the Chebyshev sample size.  The target is also capped at
    4*epsilon, the regime the multiplicative estimator relies on.

    charge=False skips the ledger charge for callers whose own theorem count
    already covers these executions.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    out_of_contract = not (epsilon < 0.5)
    classical = constants.pilot_runs
    _, pilot_sq = sub.moment_sums(constants.pilot_runs, rng)
    m2_hat = pilot_sq / constants.pilot_runs

    if m2_hat == 0.0:
        value = 0.0
        samples = 0
    else:
        m2_low = m2_hat / constants.pilot_safety
        m2_up = m2_hat * constants.pilot_safety
        tau = epsilon * min(4.0, (math.sqrt(m2_low) + 1.0) ** 2)
        samples = math.ceil(constants.lemma_chebyshev * m2_up / tau ** 2)
        total, _ = sub.moment_sums(samples, rng)
        value = total / samples
        classical += samples

    charged = theorem_execution_count(1.0 / epsilon, constants.c_quantum) if charge else 0
    if charge:
        sub.charge_quantum(charged)
    return MeanEstimate(
        value=value,
        charged_executions=charged,
        classical_executions=classical,
        mode="bounded-l2",
        out_of_contract=out_of_contract,
        details={"second_moment_pilot": m2_hat, "samples": samples},
    )


def qmean_multiplicative(
    sub: Subroutine,
    sigma: float,
    a: float,
    b: float,
    epsilon: float,
    rng: np.random.Generator,
    constants: CostConstants = DEFAULT_CONSTANTS,
) -> MeanEstimate:
    """Relative-error mean estimate: |est - E[X]| <= epsilon*E[X] w.p. >= 9/10.

    Requires var[X] <= sigma^2 * E[X]^2 and E[X] in [a, b] with a > 0; the
    theorem's range is 0 < epsilon < 24*sigma.  The output satisfies the
    exact identity value = sigma*b*(m~ - 6*mu_- + 6*mu_+), whose pieces are
    reported in details.
    """
    if not 0.0 < a <= b:
        raise ValueError("need mean bounds 0 < a <= b")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    out_of_contract = not (epsilon < 24.0 * sigma)

    scale = sigma * b
    m_tilde = float(sub.batch(1, rng)[0]) / scale
    eps_inner = epsilon * a / (48.0 * sigma * b)

    part_minus = _ResidualPart(sub, scale, m_tilde, sign=-1.0)
    part_plus = _ResidualPart(sub, scale, m_tilde, sign=+1.0)
    est_minus = bounded_l2_estimate(part_minus, eps_inner, rng, constants, charge=False)
    est_plus = bounded_l2_estimate(part_plus, eps_inner, rng, constants, charge=False)

    value = scale * (m_tilde - 6.0 * est_minus.value + 6.0 * est_plus.value)
    charged = theorem_execution_count(sigma * b / (epsilon * a), constants.c_quantum)
    sub.charge_quantum(charged)
    return MeanEstimate(
        value=value,
        charged_executions=charged,
        classical_executions=1 + est_minus.classical_executions + est_plus.classical_executions,
        mode="multiplicative",
        out_of_contract=out_of_contract,
        details={
            "m_tilde": m_tilde,
            "mu_minus": est_minus.value,
            "mu_plus": est_plus.value,
            "scale": scale,
        },
    )


def median_amplify(run, delta: float, rng: np.random.Generator,
                   constants: CostConstants = DEFAULT_CONSTANTS) -> tuple[float, list[float]]:
    """Median of ceil(median_constant * ln(1/delta)) runs of a >= 2/3 estimator.

    Boosts success probability to >= 1 - delta; returns (median, all runs).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    repetitions = math.ceil(constants.median_constant * math.log(1.0 / delta))
    outcomes = [float(run(rng)) for _ in range(max(1, repetitions))]
    return float(np.median(outcomes)), outcomes
