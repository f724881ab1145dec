"""Experiment harness: batch trials to CSV, invariant suites, plug-in baseline.

The CSV schema is the external contract; reruns with the same master seed
must reproduce output byte for byte.  To keep that promise, wall-clock
timing is off by default (the column is emitted as 0) and all floats are
serialized with repr, which round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import poisson

from .amplitude import estamp_distribution
from .constants import DEFAULT_CONSTANTS
from .distinctness import count_k_collisions
from .distributions import (
    RationalDistribution,
    kl_divergence,
    load_distribution,
    min_entropy,
    power_sum,
    ratio_bound,
    renyi_entropy,
    shannon_entropy,
    support_coverage,
)
from .estimators import (
    EstimateReport,
    EstimatorConfig,
    estimate_kl,
    estimate_min_entropy,
    estimate_renyi,
    estimate_shannon,
    estimate_support_coverage,
    estimate_support_size,
)
from .instances import INSTANCE_FAMILIES, parse_instance
from .mean_estimation import SyntheticSubroutine, qmean_additive, qmean_multiplicative
from .oracle import DistributionOracle, build_oracle

SEED_ENV_VAR = "QENTROPY_SEED"

CSV_COLUMNS = [
    "algo", "alpha", "n", "S", "eps", "delta", "seed", "estimate", "truth",
    "error_mode", "abs_or_rel_err", "success", "q_queries_p", "q_queries_q",
    "classical_execs", "wall_ms",
]


def resolve_distribution(spec: str, seed: Optional[int] = None) -> RationalDistribution:
    """Instance spec (uniform:64, zipf:1.5:256, ...) or path to a JSON file."""
    family = spec.split(":", 1)[0]
    if family in INSTANCE_FAMILIES:
        return parse_instance(spec, seed)
    if not os.path.exists(spec):
        raise ValueError(
            "distribution %r is neither a known instance family nor a file" % spec)
    return load_distribution(spec)


def derive_seed(master_seed: int, cell_index: int, trial_index: int) -> int:
    """Deterministic per-trial seed from (master, cell, trial)."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(cell_index, trial_index))
    return int(seq.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# measures shared by `exact`, the plug-in baseline, and truth columns


def evaluate_measure(dist: RationalDistribution, measure: str,
                     dist_q: Optional[RationalDistribution] = None) -> float:
    """Exact value of a named measure: shannon | renyi:<a> | minentropy |
    support | power-sum:<a> | coverage:<t> | kl (needs dist_q).

    Coverage is reported normalized by the sample count t, matching the
    estimator's output scale.
    """
    name, _, arg = measure.partition(":")
    if name == "shannon":
        return shannon_entropy(dist)
    if name == "renyi":
        return renyi_entropy(dist, float(arg))
    if name == "minentropy":
        return min_entropy(dist)
    if name == "support":
        return float(dist.support_size())
    if name == "power-sum":
        return power_sum(dist, float(arg))
    if name == "coverage":
        t = int(arg)
        return support_coverage(dist, t) / t
    if name == "kl":
        if dist_q is None:
            raise ValueError("measure 'kl' needs a second distribution")
        return kl_divergence(dist, dist_q)
    raise ValueError("unknown measure %r" % measure)


def classical_plugin_baseline(oracle: DistributionOracle, measure: str,
                              n_samples: int, rng: np.random.Generator,
                              oracle_q: Optional[DistributionOracle] = None,
                              epsilon: float = math.inf) -> EstimateReport:
    """Plug-in estimator: evaluate the measure on empirical frequencies.

    Draws are charged as classical queries only.  A KL plug-in whose
    empirical q lands zero mass where empirical p has support is reported as
    undefined (NaN estimate, success False) rather than raising.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    draws = oracle.sample_classical(rng, n_samples)
    counts = np.bincount(draws, minlength=oracle.n + 1)[1:]
    empirical = RationalDistribution(n_samples, tuple(int(c) for c in counts))
    source = oracle.source
    undefined = False
    if measure.partition(":")[0] == "kl":
        if oracle_q is None:
            raise ValueError("KL plug-in needs oracle_q")
        draws_q = oracle_q.sample_classical(rng, n_samples)
        counts_q = np.bincount(draws_q, minlength=oracle_q.n + 1)[1:]
        empirical_q = RationalDistribution(n_samples, tuple(int(c) for c in counts_q))
        truth = kl_divergence(source, oracle_q.source)
        if np.any((counts > 0) & (counts_q == 0)):
            undefined = True
            estimate = math.nan
        else:
            estimate = kl_divergence(empirical, empirical_q)
    else:
        truth = evaluate_measure(source, measure)
        estimate = evaluate_measure(empirical, measure)
    err = abs(estimate - truth)
    return EstimateReport(
        algo="plugin:" + measure, estimate=float(estimate), truth=float(truth),
        error_mode="additive", tolerance=epsilon,
        success=bool(not undefined and err <= epsilon), error=float(err),
        n=oracle.n, denominator=source.denominator,
        epsilon=epsilon, delta=0.0, seed=None, mode="plugin",
        ledger=oracle.ledger.snapshot(),
        ledger_q=oracle_q.ledger.snapshot() if oracle_q is not None else None,
        classical_executions=oracle.ledger.classical_executions,
        extras={"n_samples": n_samples, "undefined": undefined},
    )


# ---------------------------------------------------------------------------
# experiment cells


@dataclass(frozen=True)
class ExperimentConfig:
    cells: tuple[dict, ...]
    trials: int = 1
    master_seed: Optional[int] = None
    record_timing: bool = False

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict) or "cells" not in raw:
            raise ValueError("experiment config must be a JSON object with 'cells'")
        known = {"cells", "trials", "master_seed", "record_timing"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        cells = raw["cells"]
        if not isinstance(cells, list) or not all(isinstance(c, dict) for c in cells):
            raise ValueError("'cells' must be a list of objects")
        return cls(cells=tuple(cells), trials=int(raw.get("trials", 1)),
                   master_seed=raw.get("master_seed"),
                   record_timing=bool(raw.get("record_timing", False)))


def run_cell_trial(cell: dict, seed: Optional[int],
                   record_timing: bool = False) -> EstimateReport:
    """Run one estimator trial described by a cell dict.

    Cell keys: algo (shannon|kl|renyi|minentropy|coverage|support|plugin),
    dist, and per-algorithm parameters (alpha, eps, delta, dist_q, f, m,
    n_samples, measure, mode, distinctness_cost, dist_seed).
    """
    algo = cell.get("algo")
    if algo is None or "dist" not in cell:
        raise ValueError("cell needs at least 'algo' and 'dist'")
    dist = resolve_distribution(cell["dist"], cell.get("dist_seed"))
    started = time.perf_counter()
    if algo == "plugin":
        if "measure" not in cell or "n_samples" not in cell:
            raise ValueError("plugin cells need 'measure' and 'n_samples'")
        rng = np.random.default_rng(seed)
        oracle_q = None
        if cell["measure"].partition(":")[0] == "kl":
            if "dist_q" not in cell:
                raise ValueError("KL plugin cells need 'dist_q'")
            oracle_q = build_oracle(resolve_distribution(cell["dist_q"]))
        report = classical_plugin_baseline(
            build_oracle(dist), cell["measure"], int(cell["n_samples"]), rng,
            oracle_q, epsilon=float(cell.get("eps", math.inf)))
        report.seed = seed
    else:
        cfg = EstimatorConfig(
            epsilon=float(cell.get("eps", 0.25)),
            delta=float(cell.get("delta", 0.1)),
            seed=seed,
            mode=cell.get("mode", "contract"),
            constants=DEFAULT_CONSTANTS,
            distinctness_cost=cell.get("distinctness_cost"),
        )
        oracle = build_oracle(dist)
        if algo == "shannon":
            report = estimate_shannon(oracle, cfg)
        elif algo == "kl":
            if "dist_q" not in cell:
                raise ValueError("kl cells need 'dist_q'")
            dist_q = resolve_distribution(cell["dist_q"])
            oracle_q = build_oracle(dist_q)
            f = float(cell["f"]) if "f" in cell else float(ratio_bound(dist, dist_q))
            report = estimate_kl(oracle, oracle_q, f, cfg)
        elif algo == "renyi":
            if "alpha" not in cell:
                raise ValueError("renyi cells need 'alpha'")
            report = estimate_renyi(oracle, float(cell["alpha"]), cfg)
        elif algo == "minentropy":
            report = estimate_min_entropy(oracle, cfg)
        elif algo == "coverage":
            if "n_samples" not in cell:
                raise ValueError("coverage cells need 'n_samples'")
            report = estimate_support_coverage(oracle, int(cell["n_samples"]), cfg)
        elif algo == "support":
            if "m" not in cell:
                raise ValueError("support cells need 'm'")
            report = estimate_support_size(oracle, int(cell["m"]), cfg)
        else:
            raise ValueError("unknown algo %r" % algo)
    if record_timing:
        report.wall_ms = int((time.perf_counter() - started) * 1000)
    return report


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_to_row(report: EstimateReport) -> list[str]:
    return [
        report.algo,
        _fmt(report.alpha),
        _fmt(report.n),
        _fmt(report.denominator),
        _fmt(report.epsilon),
        _fmt(report.delta),
        _fmt(report.seed),
        _fmt(report.estimate),
        _fmt(report.truth),
        report.error_mode,
        _fmt(report.error),
        _fmt(report.success),
        _fmt(int(report.ledger["quantum_total"])),
        _fmt(0 if report.ledger_q is None else int(report.ledger_q["quantum_total"])),
        _fmt(report.classical_executions),
        _fmt(report.wall_ms),
    ]


def run_experiment(config: ExperimentConfig, out_path: str) -> int:
    """Run all cells x trials, write the CSV, return the row count.

    Rows appear in cell-major, trial-minor order; each trial's seed derives
    from (master seed, cell index, trial index), so any row can be replayed
    in isolation.
    """
    master = config.master_seed
    if master is None:
        master = int(os.environ.get(SEED_ENV_VAR, "0"))
    rows = []
    for cell_index, cell in enumerate(config.cells):
        trials = int(cell.get("trials", config.trials))
        for trial_index in range(trials):
            seed = derive_seed(master, cell_index, trial_index)
            report = run_cell_trial(cell, seed, config.record_timing)
            rows.append(report_to_row(report))
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
    return len(rows)


# ---------------------------------------------------------------------------
# verification suites


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    margin: float  # positive slack = comfortably inside the bound
    detail: str = ""
    # True marks a check that fails for a documented mathematical reason
    # (see poisson_suite); such rows do not fail the suite.
    known_defect: bool = False


_K1_CONFIDENCE = 8.0 / math.pi ** 2


def estamp_suite(seed: int = 20260815, draws: int = 200) -> list[CheckResult]:
    """Closed-form outcome law: normalization and the k=1 deviation window."""
    rng = np.random.default_rng(seed)
    amplitudes = rng.random(draws)
    checks = []
    for m_exp in range(1, 9):
        M = 1 << m_exp
        worst_norm = 0.0
        worst_mass = 1.0
        for a in amplitudes:
            table = estamp_distribution(float(a), M)
            worst_norm = max(worst_norm, abs(table.raw_total - 1.0))
            mass = table.mass_within(float(a), table.deviation_bound(1))
            worst_mass = min(worst_mass, mass)
        checks.append(CheckResult(
            "estamp", "normalization M=%d" % M, worst_norm <= 1e-9,
            1e-9 - worst_norm, "worst |sum-1| = %.3e" % worst_norm))
        checks.append(CheckResult(
            "estamp", "k=1 window mass M=%d" % M, worst_mass >= _K1_CONFIDENCE,
            worst_mass - _K1_CONFIDENCE,
            "worst in-window mass = %.7f (needs >= %.7f)" % (worst_mass, _K1_CONFIDENCE)))
    zero = estamp_distribution(0.0, 64)
    exact_zero = len(zero.values) == 1 and zero.values[0] == 0.0 and zero.probabilities[0] == 1.0
    checks.append(CheckResult(
        "estamp", "a=0 returns a point mass", exact_zero, 0.0 if exact_zero else -1.0))
    return checks


def sandwich_suite(seed: int = 20260815, trials: int = 1000) -> list[CheckResult]:
    """Power-sum interpolation bounds on random rational distributions.

    For 0 < a1 < a2: P_{a2}^{a1/a2} <= P_{a1} <= n^{1-a1/a2} * P_{a2}^{a1/a2},
    each side allowed 1e-12 relative slack.
    """
    rng = np.random.default_rng(seed)
    worst_lower = math.inf
    worst_upper = math.inf
    for _ in range(trials):
        n = int(rng.integers(2, 65))
        counts = rng.integers(0, 20, size=n)
        if counts.sum() == 0:
            counts[0] = 1
        dist = RationalDistribution(int(counts.sum()), tuple(int(c) for c in counts))
        a1, a2 = sorted(float(x) for x in rng.uniform(0.2, 5.0, size=2))
        if a2 - a1 < 1e-9:
            a2 += 1e-3
        r = a1 / a2
        p1 = power_sum(dist, a1)
        p2 = power_sum(dist, a2)
        lower = p2 ** r
        upper = n ** (1.0 - r) * p2 ** r
        worst_lower = min(worst_lower, (p1 - lower) / lower)
        worst_upper = min(worst_upper, (upper - p1) / upper)
    checks = [
        CheckResult("sandwich", "lower bound x%d" % trials, worst_lower >= -1e-12,
                    worst_lower + 1e-12, "worst relative slack %.3e" % worst_lower),
        CheckResult("sandwich", "upper bound x%d" % trials, worst_upper >= -1e-12,
                    worst_upper + 1e-12, "worst relative slack %.3e" % worst_upper),
    ]
    return checks


def _poisson_upper_tail(mu: float, threshold: float) -> float:
    # P[X >= threshold] for integer-valued X ~ Poisson(mu)
    return float(poisson.sf(math.ceil(threshold) - 1, mu))


def poisson_suite() -> list[CheckResult]:
    """Tail facts behind the escalating min-entropy search.

    Clause A (intensity at the detection threshold): mu = t = 16 ln(n)/eps^2
    gives P[X >= t] > 0.15.  Holds with ~0.49 mass everywhere on the grid.

    Clause B (intensity a sqrt(1+eps) factor below): the modeled claim is
    P[X >= t] <= 2/n^2.  Exact evaluation shows this fails on the whole
    grid: with mu = t/c, c = sqrt(1+eps), the true decay exponent is
    16*(1/c - 1 + ln c)/eps^2 * ln n, which is below 2 ln n for every
    eps > 0 and approaches it only as eps -> 0.  Those rows are emitted as
    known defects; the suite instead enforces the corrected bound
    P[X >= t] <= 2 * n^(-q) with q the exponent above.
    """
    checks = []
    grid_n = (16, 32, 64, 128, 256, 512, 1024)
    for eps in (0.5, 1.0):
        for n in grid_n:
            t = 16.0 * math.log(n) / eps ** 2
            tail = _poisson_upper_tail(t, t)
            checks.append(CheckResult(
                "poisson", "upper tail n=%d eps=%s" % (n, eps), tail > 0.15,
                tail - 0.15, "P[X>=t]=%.4f at mu=t=%.2f" % (tail, t)))
    for eps in (0.5, 1.0):
        c = math.sqrt(1.0 + eps)
        q = 16.0 * (1.0 / c - 1.0 + math.log(c)) / eps ** 2
        for n in grid_n:
            if n < 64:
                continue
            t = 16.0 * math.log(n) / eps ** 2
            tail = _poisson_upper_tail(t / c, t)
            bound = 2.0 / n ** 2
            corrected = 2.0 * n ** (-q)
            checks.append(CheckResult(
                "poisson", "lower tail (modeled) n=%d eps=%s" % (n, eps),
                tail <= bound, bound - tail,
                "P[X>=t]=%.3e vs 2/n^2=%.3e (ratio %.1f)" % (tail, bound, tail / bound),
                known_defect=tail > bound))
            checks.append(CheckResult(
                "poisson", "lower tail (corrected exponent %.3f) n=%d eps=%s" % (q, n, eps),
                tail <= corrected, corrected - tail,
                "P[X>=t]=%.3e vs 2*n^-q=%.3e" % (tail, corrected)))
    return checks


_COLLISION_GRID = ((4, 3, 2), (8, 5, 2), (8, 6, 3))


def _collision_counts_rows(samples: np.ndarray, k: int) -> np.ndarray:
    """Exact k-collision count per row of a (rows, l) symbol matrix."""
    rows, length = samples.shape
    ordered = np.sort(samples, axis=1)
    boundaries = np.ones((rows, length), dtype=bool)
    boundaries[:, 1:] = ordered[:, 1:] != ordered[:, :-1]
    out = np.zeros(rows, dtype=np.int64)
    # run lengths per row via positions of boundaries
    comb_table = np.array([math.comb(m, k) for m in range(length + 1)], dtype=np.int64)
    for r in range(rows):
        idx = np.flatnonzero(boundaries[r])
        runs = np.diff(np.append(idx, length))
        out[r] = comb_table[runs].sum()
    return out


def collision_suite(seed: int = 20260815, mc_rows: int = 100_000) -> list[CheckResult]:
    """Collision-count statistics: E[C] = C(l, k) * P_k(p).

    Exact: integer-arithmetic enumeration of all n^l sequences must satisfy
    sum_s (prod_i c_{s_i}) * C(s) = C(l,k) * (sum_i c_i^k) * S^(l-k).
    Monte-Carlo: the sample mean over mc_rows sequences must sit within
    5 standard errors of the exact expectation.
    """
    from itertools import product

    from .instances import zipf

    rng = np.random.default_rng(seed)
    checks = []
    for n, length, k in _COLLISION_GRID:
        dist = zipf(1.5, n)
        counts = np.array(dist.counts, dtype=np.int64)
        denominator = dist.denominator

        seqs = np.array(list(product(range(n), repeat=length)), dtype=np.int64)
        weights = counts[seqs].prod(axis=1)
        collisions = _collision_counts_rows(seqs, k)
        lhs = int((weights * collisions).sum())
        p_sum_num = int((counts.astype(object) ** k).sum())
        rhs = math.comb(length, k) * p_sum_num * denominator ** (length - k)
        exact_ok = lhs == rhs
        checks.append(CheckResult(
            "collision", "exact enumeration n=%d l=%d k=%d" % (n, length, k),
            exact_ok, 0.0 if exact_ok else -1.0,
            "integer identity %d == %d" % (lhs, rhs)))

        expectation = math.comb(length, k) * power_sum(dist, k)
        probs = counts / denominator
        draws = rng.choice(n, size=(mc_rows, length), p=probs)
        sample = _collision_counts_rows(draws, k).astype(np.float64)
        se = sample.std(ddof=1) / math.sqrt(mc_rows)
        gap = abs(sample.mean() - expectation)
        checks.append(CheckResult(
            "collision", "monte carlo n=%d l=%d k=%d" % (n, length, k),
            gap <= 5.0 * se, 5.0 * se - gap,
            "mean %.6f vs %.6f (se %.6f)" % (sample.mean(), expectation, se)))
    return checks


def meanest_suite(seed: int = 20260815, trials: int = 400) -> list[CheckResult]:
    """Mean-estimation contracts on synthetic finite-support subroutines."""
    rng = np.random.default_rng(seed)
    checks = []

    const = SyntheticSubroutine([0.5], [1.0])
    me = qmean_additive(const, 1.0, 0.1, rng)
    checks.append(CheckResult(
        "meanest", "additive on constant subroutine is exact",
        me.value == 0.5, 0.0 if me.value == 0.5 else -abs(me.value - 0.5)))

    eps = 0.25
    a, b = 1.0, 2.0
    for rel_var in (0.04, 0.25):
        c = math.sqrt(rel_var)
        mean = 1.3
        sub = SyntheticSubroutine([mean * (1 - c), mean * (1 + c)], [0.5, 0.5])
        sigma = math.sqrt(rel_var)
        failures = 0
        worst_identity = 0.0
        for _ in range(trials):
            est = qmean_multiplicative(sub, sigma, a, b, eps, rng)
            if abs(est.value - mean) > eps * mean:
                failures += 1
            d = est.details
            rebuilt = d["scale"] * (d["m_tilde"] - 6.0 * d["mu_minus"] + 6.0 * d["mu_plus"])
            worst_identity = max(worst_identity, abs(rebuilt - est.value))
        rate = failures / trials
        limit = 0.1 + 3.0 * math.sqrt(0.1 * 0.9 / trials)
        checks.append(CheckResult(
            "meanest", "multiplicative failure rate, rel var %.2f" % rel_var,
            rate <= limit, limit - rate,
            "%d/%d failures (allowed %.3f)" % (failures, trials, limit)))
        checks.append(CheckResult(
            "meanest", "output identity, rel var %.2f" % rel_var,
            worst_identity <= 1e-12, 1e-12 - worst_identity,
            "worst |rebuilt - value| = %.2e" % worst_identity))

    sigma = 1.0
    sub = SyntheticSubroutine([0.0, 2.0], [0.5, 0.5])  # mean 1, variance 1
    failures = 0
    for _ in range(trials):
        est = qmean_additive(sub, sigma, 0.25, rng)
        if abs(est.value - 1.0) > 0.25:
            failures += 1
    rate = failures / trials
    limit = 0.2 + 3.0 * math.sqrt(0.2 * 0.8 / trials)
    checks.append(CheckResult(
        "meanest", "additive failure rate", rate <= limit, limit - rate,
        "%d/%d failures (allowed %.3f)" % (failures, trials, limit)))
    return checks


SUITES: dict[str, Callable[[], list[CheckResult]]] = {
    "estamp": estamp_suite,
    "sandwich": sandwich_suite,
    "poisson": poisson_suite,
    "collision": collision_suite,
    "meanest": meanest_suite,
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        results = []
        for suite_name in SUITES:
            results.extend(SUITES[suite_name]())
        return results
    if name not in SUITES:
        raise ValueError("unknown suite %r (choose from %s, all)" %
                         (name, ", ".join(SUITES)))
    return SUITES[name]()


def suite_passed(results: list[CheckResult]) -> bool:
    return all(c.passed or c.known_defect for c in results)
