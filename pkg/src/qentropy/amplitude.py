"""Closed-form outcome law of quantum amplitude estimation.

Estimating an amplitude a = sin^2(omega * pi) with an M-query phase
estimation (M a power of two) returns a value on the grid sin^2(l*pi/M),
l = 0..M/2.  Measurement outcomes are indexed y in {0, ..., M-1}; outcome y
occurs with probability

    P(y) = (f(d(omega, y/M)) + f(d(omega, -y/M))) / 2,
    f(D)  = sin^2(M*D*pi) / (M^2 * sin^2(D*pi)),   f(0) = 1,

where d(.,.) is circular distance on the unit interval (the two mirrored
phase components contribute equally, so P(y) = P(M-y)).  Outcomes y and M-y
produce the same estimate sin^2(y*pi/M) and are merged onto the grid.  The
law is exact, so estimator statistics can be enumerated instead of run on
hardware.  An M-query invocation is charged M quantum queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .oracle import DistributionOracle

# Circular distances below this are treated as an exact grid hit.
_GRID_TOLERANCE = 1e-14

# Probability mass must survive the closed form to this accuracy before the
# table is renormalized.
_NORMALIZATION_TOLERANCE = 1e-9


def is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def grid_value(l: int, M: int) -> float:
    """The l-th representable estimate sin^2(l*pi/M), 0 <= l <= M/2."""
    return math.sin(math.pi * l / M) ** 2


def estamp_prime_floor(M: int) -> float:
    """Smallest nonzero value of the zero-adjusted variant: sin^2(pi/(2M))."""
    return math.sin(math.pi / (2 * M)) ** 2


def _fejer(delta: float, M: int) -> float:
    if delta < _GRID_TOLERANCE:
        return 1.0
    s = math.sin(math.pi * delta)
    return (math.sin(M * math.pi * delta) / (M * s)) ** 2


def _circular_distance(x: float) -> float:
    d = x - math.floor(x)
    return min(d, 1.0 - d)


def measurement_probabilities(a: float, M: int) -> np.ndarray:
    """Raw outcome law over y = 0..M-1, before merging; symmetric in y <-> M-y."""
    if not is_power_of_two(M) or M < 2:
        raise ValueError("M must be a power of two, at least 2")
    if not 0.0 <= a <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    omega = math.asin(math.sqrt(a)) / math.pi
    j = round(omega * M)
    if abs(omega * M - j) < _GRID_TOLERANCE * M:
        # On-grid phase: every other outcome vanishes exactly (sin(pi*(j-y))
        # is 0 for integers); evaluating the closed form in floats would
        # instead leave ~1e-33 dust on the off outcomes.
        probs = np.zeros(M)
        probs[j % M] += 0.5
        probs[(M - j) % M] += 0.5
        return probs
    probs = np.empty(M)
    for y in range(M):
        d_plus = _circular_distance(omega - y / M)
        d_minus = _circular_distance(omega + y / M)
        probs[y] = 0.5 * (_fejer(d_plus, M) + _fejer(d_minus, M))
    return probs


@dataclass(frozen=True)
class EstAmpDistribution:
    """Merged outcome table of one amplitude-estimation invocation."""

    M: int
    a: float
    omega: float
    values: np.ndarray        # grid values sin^2(l*pi/M), l = 0..M/2, ascending
    probabilities: np.ndarray
    raw_total: float          # mass before renormalization; should be ~1.0

    def __post_init__(self):
        self.values.setflags(write=False)
        self.probabilities.setflags(write=False)
        object.__setattr__(self, "_cumulative", np.cumsum(self.probabilities))

    def sample_many(self, count: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(count)
        idx = np.searchsorted(self._cumulative, u, side="right")
        return self.values[np.minimum(idx, len(self.values) - 1)]

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.sample_many(1, rng)[0])

    def mass_within(self, center: float, radius: float) -> float:
        """Total probability of outcomes v with |v - center| <= radius."""
        inside = np.abs(self.values - center) <= radius + 1e-12
        return float(self.probabilities[inside].sum())

    def deviation_bound(self, k: int = 1) -> float:
        """Radius of the k-th confidence window around the true amplitude."""
        return (
            2.0 * math.pi * k * math.sqrt(self.a * (1.0 - self.a)) / self.M
            + (k * math.pi / self.M) ** 2
        )


@lru_cache(maxsize=65536)
def estamp_distribution(a: float, M: int) -> EstAmpDistribution:
    """Exact merged outcome distribution for amplitude a and budget M."""
    raw = measurement_probabilities(a, M)
    half = M // 2
    merged = np.empty(half + 1)
    merged[0] = raw[0]
    merged[half] = raw[half]
    for l in range(1, half):
        merged[l] = raw[l] + raw[M - l]
    values = np.array([grid_value(l, M) for l in range(half + 1)])
    raw_total = float(merged.sum())
    if abs(raw_total - 1.0) > _NORMALIZATION_TOLERANCE:
        raise ArithmeticError(
            "outcome law lost mass: sums to %.17g for a=%r M=%d" % (raw_total, a, M)
        )
    keep = merged > 0.0  # exact zeros only appear for on-grid phases
    values, merged = values[keep], merged[keep]
    omega = math.asin(math.sqrt(a)) / math.pi
    return EstAmpDistribution(
        M=M, a=a, omega=omega, values=values,
        probabilities=merged / raw_total, raw_total=raw_total,
    )


def sample_estamp(
    oracle: DistributionOracle, symbol: int, M: int, rng: np.random.Generator
) -> float:
    """One M-query amplitude estimate of p_symbol; charges M under "estamp"."""
    a = float(oracle.preimage_fraction(symbol))
    oracle.ledger.charge("estamp", M)
    return estamp_distribution(a, M).sample(rng)


def sample_estamp_prime(
    oracle: DistributionOracle, symbol: int, M: int, rng: np.random.Generator
) -> float:
    """Zero-adjusted variant: an outcome of 0 is reported as sin^2(pi/(2M)).

    Guarantees a positive estimate, at least 1/M^2, so logarithmic and
    negative-power payoffs stay finite.
    """
    out = sample_estamp(oracle, symbol, M, rng)
    return estamp_prime_floor(M) if out == 0.0 else out


def multiplicative_budget(epsilon: float, p_floor: float) -> int:
    """Smallest power-of-two M whose first confidence window gives relative
    error epsilon for any amplitude at least p_floor."""
    if not 0.0 < p_floor <= 1.0:
        raise ValueError("p_floor must lie in (0, 1]")
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    M = 2
    while 2.0 * math.pi * math.sqrt(p_floor) / M + (math.pi / M) ** 2 > epsilon * p_floor:
        M *= 2
        if M > 1 << 62:
            raise ValueError("budget overflow; epsilon * p_floor too small")
    return M


def sample_estamp_multiplicative(
    oracle: DistributionOracle,
    symbol: int,
    epsilon: float,
    p_floor: float,
    rng: np.random.Generator,
) -> tuple[float, int]:
    """Relative-error amplitude estimate assuming p_symbol >= p_floor.

    Returns (estimate, M); with probability at least 8/pi^2 the estimate is
    within relative epsilon whenever the floor assumption holds.
    """
    M = multiplicative_budget(epsilon, p_floor)
    return sample_estamp(oracle, symbol, M, rng), M
