"""Closed-form output law of fixed-budget amplitude estimation."""

import math

import numpy as np
import pytest

from qentropy.amplitude import (
    estamp_distribution,
    estamp_prime_floor,
    grid_value,
    measurement_probabilities,
    multiplicative_budget,
    sample_estamp,
    sample_estamp_multiplicative,
    sample_estamp_prime,
)
from qentropy.instances import point_mass, uniform
from qentropy.oracle import build_oracle

# Reference table for a=0.3, M=8, computed independently with 50-digit
# arithmetic straight from the definition (phase omega = asin(sqrt a)/pi,
# kernel sin^2(M.delta.pi) / (M sin(delta.pi))^2, mirrored outcomes merged).
REF_A03_M8_VALUES = [0.0, 0.14644660940672624, 0.5, 0.85355339059327376, 1.0]
REF_A03_M8_PROBS = [
    0.0517888,
    0.47255536458331594,
    0.388416,
    0.065044635416684059,
    0.0221952,
]


def test_frozen_table_a03_m8():
    dist = estamp_distribution(0.3, 8)
    assert dist.values.tolist() == pytest.approx(REF_A03_M8_VALUES, abs=1e-15)
    assert dist.probabilities.tolist() == pytest.approx(REF_A03_M8_PROBS, rel=1e-13)


def test_frozen_spot_values_a07_m16():
    # same independent 50-digit computation, three spot checks
    dist = estamp_distribution(0.7, 16)
    lookup = dict(zip(dist.values.tolist(), dist.probabilities.tolist()))
    assert lookup[0.0] == pytest.approx(0.000125514743808, rel=1e-12)
    assert lookup[1.0] == pytest.approx(0.000292867735552, rel=1e-12)
    peak_value = grid_value(5, 16)
    assert peak_value == pytest.approx(0.69134171618254489, rel=1e-15)
    assert lookup[peak_value] == pytest.approx(0.99260151898042028, rel=1e-13)
    assert max(dist.probabilities) == pytest.approx(lookup[peak_value])


def test_law_normalizes_for_generic_amplitudes():
    rng = np.random.default_rng(5)
    for M in (2, 4, 8, 32, 128):
        for a in rng.uniform(0.0, 1.0, size=40):
            dist = estamp_distribution(float(a), M)
            assert abs(dist.raw_total - 1.0) < 1e-9
            assert np.all(dist.probabilities >= 0.0)
            assert np.all(np.diff(dist.values) > 0)


def test_raw_probabilities_are_symmetric():
    for a in (0.13, 0.5, 0.77):
        probs = measurement_probabilities(a, 16)
        for y in range(1, 16):
            assert probs[y] == pytest.approx(probs[16 - y], rel=1e-12)


def test_on_grid_amplitudes_give_point_masses():
    for a, M in ((0.0, 8), (1.0, 8), (0.5, 4), (grid_value(3, 16), 16)):
        dist = estamp_distribution(a, M)
        assert len(dist.values) == 1
        assert dist.values[0] == pytest.approx(a, abs=1e-15)
        assert dist.probabilities[0] == 1.0


def test_grid_values_bracket_the_unit_interval():
    M = 32
    vals = [grid_value(l, M) for l in range(M // 2 + 1)]
    assert vals[0] == 0.0
    assert vals[-1] == 1.0
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_deviation_window_masses():
    # k-window mass is at least 1 - 1/(2(k-1)) for k > 1 and 8/pi^2 for k = 1
    rng = np.random.default_rng(17)
    thresholds = {1: 8 / math.pi**2, 2: 0.5, 3: 0.75, 4: 1 - 1 / 6}
    for M in (8, 64, 256):
        for a in rng.uniform(0.0, 1.0, size=30):
            dist = estamp_distribution(float(a), M)
            for k, floor in thresholds.items():
                mass = dist.mass_within(float(a), dist.deviation_bound(k))
                assert mass >= floor - 1e-12


def test_deviation_bound_formula():
    dist = estamp_distribution(0.3, 16)
    expected = (
        2 * math.pi * math.sqrt(0.3 * 0.7) / 16 + (math.pi / 16) ** 2
    )
    assert dist.deviation_bound(1) == pytest.approx(expected, rel=1e-14)
    assert dist.deviation_bound(3) == pytest.approx(
        3 * 2 * math.pi * math.sqrt(0.3 * 0.7) / 16 + (3 * math.pi / 16) ** 2,
        rel=1e-14,
    )


def test_budget_must_be_a_power_of_two():
    with pytest.raises(ValueError):
        estamp_distribution(0.3, 12)
    with pytest.raises(ValueError):
        estamp_distribution(0.3, 0)
    with pytest.raises(ValueError):
        estamp_distribution(1.2, 8)


def test_sampling_is_seeded_and_charged():
    orc = build_oracle(uniform(4))
    rng_a = np.random.default_rng(12)
    rng_b = np.random.default_rng(12)
    xs = [sample_estamp(orc, 1, 32, rng_a) for _ in range(20)]
    ys = [sample_estamp(orc, 1, 32, rng_b) for _ in range(20)]
    assert xs == ys
    assert orc.ledger.phases["estamp"] == 2 * 20 * 32
    grid = {grid_value(l, 32) for l in range(17)}
    assert set(xs) <= grid


def test_estamp_prime_never_returns_zero():
    floor = estamp_prime_floor(8)
    assert floor == pytest.approx(math.sin(math.pi / 16) ** 2, rel=1e-14)
    orc = build_oracle(point_mass(4))  # symbol 2 has amplitude 0
    rng = np.random.default_rng(3)
    for _ in range(10):
        assert sample_estamp_prime(orc, 2, 8, rng) == floor
    # and samples for positive amplitudes are simply the law's output
    assert sample_estamp_prime(orc, 1, 8, rng) > 0.0


def test_multiplicative_budget_bounds():
    for eps in (0.5, 0.25, 0.1):
        for p_floor in (1 / 4, 1 / 64, 1 / 1024):
            M = multiplicative_budget(eps, p_floor)
            assert M & (M - 1) == 0  # power of two
            # budget large enough that the k=1 window is a relative-eps window
            bound = 2 * math.pi * math.sqrt(1 / p_floor) / M + (math.pi / M) ** 2 / p_floor
            assert bound <= eps
    assert multiplicative_budget(0.1, 1 / 16) >= multiplicative_budget(0.5, 1 / 16)


def test_multiplicative_sampling_contract():
    # estimate within relative eps with prob >= 8/pi^2, exact law check
    eps, p_floor = 0.5, 1 / 4
    M = multiplicative_budget(eps, p_floor)
    orc = build_oracle(uniform(4))
    rng = np.random.default_rng(8)
    hits = 0
    trials = 400
    for _ in range(trials):
        est, used = sample_estamp_multiplicative(orc, 1, eps, p_floor, rng)
        assert used == M
        if abs(est - 0.25) <= eps * 0.25:
            hits += 1
    rate = hits / trials
    sigma = math.sqrt(rate * (1 - rate) / trials) if 0 < rate < 1 else 0.0
    assert rate >= 8 / math.pi**2 - 3 * sigma - 1e-9


def test_tables_are_cached():
    a = estamp_distribution(0.3, 8)
    b = estamp_distribution(0.3, 8)
    assert a is b
