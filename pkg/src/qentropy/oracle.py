"""Table oracles for discrete distributions, with query accounting.

An oracle for p encodes the distribution as a table of S symbol labels: bin i
appears counts[i-1] times, so drawing a uniformly random table position and
reading the entry samples from p.  Quantum algorithms are charged against the
ledger attached to the oracle; the ledger separates charged quantum queries
(keyed by phase label) from the classical executions the simulation actually
performed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .distributions import RationalDistribution


class QueryLedger:
    """Per-oracle cost record.

    Quantum charges are grouped under free-form phase labels such as
    "sample", "estamp" or "distinctness"; counters never decrease and the
    quantum total is, by construction, the sum of the per-phase records.
    Classical executions (work the simulator really did) are tracked
    separately and never mix with the quantum counters.
    """

    def __init__(self):
        self.phases: dict[str, int] = {}
        self.events: list[tuple[str, int]] = []
        self.classical_executions: int = 0

    def charge(self, phase: str, amount: int) -> None:
        amount = int(amount)
        if amount < 0:
            raise ValueError("charges must be non-negative")
        if amount == 0:
            return
        self.phases[phase] = self.phases.get(phase, 0) + amount
        self.events.append((phase, amount))

    def charge_classical(self, count: int = 1) -> None:
        if count < 0:
            raise ValueError("charges must be non-negative")
        self.classical_executions += int(count)

    @property
    def quantum_total(self) -> int:
        return sum(self.phases.values())

    def snapshot(self) -> dict:
        return {
            "phases": dict(self.phases),
            "quantum_total": self.quantum_total,
            "classical_executions": self.classical_executions,
        }


@dataclass
class DistributionOracle:
    """Oracle table plus its ledger; build with build_oracle()."""

    source: RationalDistribution
    table: np.ndarray
    ledger: QueryLedger = field(default_factory=QueryLedger)

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def size(self) -> int:
        return int(self.table.shape[0])

    def sample(self, rng: np.random.Generator) -> int:
        """Evaluate the table at a uniform position; charges 1 quantum query."""
        self.ledger.charge("sample", 1)
        return int(self.table[rng.integers(self.size)])

    def sample_classical(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        """Classical draws (plug-in baselines); recorded as classical work only."""
        self.ledger.charge_classical(count)
        return self.table[rng.integers(self.size, size=count)]

    def draws_for_simulation(self, rng: np.random.Generator, count: int) -> np.ndarray:
        # Simulation-internal sampling: quantum algorithms that touch these
        # positions only inside a charged subroutine pay via that subroutine's
        # explicit charge, not per draw.
        return self.table[rng.integers(self.size, size=count)]

    def preimage_fraction(self, symbol: int) -> Fraction:
        """Exact p_i for the 1-based symbol; an inspection, never charged."""
        return self.source.fraction(symbol)


def build_oracle(
    dist: RationalDistribution,
    shuffle_seed: int | None = None,
    ledger: QueryLedger | None = None,
) -> DistributionOracle:
    """Lay out the canonical table [1]*m_1 + [2]*m_2 + ... and optionally shuffle.

    The table is deterministic given (dist, shuffle_seed); shuffle_seed=None
    keeps the sorted layout.
    """
    table = np.repeat(
        np.arange(1, dist.n + 1, dtype=np.int64),
        np.asarray(dist.counts, dtype=np.int64),
    )
    if shuffle_seed is not None:
        table = np.random.default_rng(shuffle_seed).permutation(table)
    return DistributionOracle(source=dist, table=table, ledger=ledger or QueryLedger())


def replicate(oracle: DistributionOracle, copies: int) -> DistributionOracle:
    """Concatenate `copies` copies of the table: entry s + S*l maps to entry s.

    The replicated oracle realizes the same distribution and shares the
    original's ledger (queries to a copy are queries to p).
    """
    if copies < 1:
        raise ValueError("need at least one copy")
    return DistributionOracle(
        source=oracle.source,
        table=np.tile(oracle.table, copies),
        ledger=oracle.ledger,
    )
