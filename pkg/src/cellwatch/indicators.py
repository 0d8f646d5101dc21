"""Cell-level threat measures and the ordered attack-indicator family.

Five measures in [0, 1] summarize a cell at a tick: collective progress of
the cell filter, the product of member threat masses, pairwise cohesion of
the communicating pairs, subnetwork density, and size integrity.  Sorting
the measures and taking partial products of the largest values yields an
ordered indicator family used to rank cells for prioritization: the zeroth
indicator is the full product, the last is the single largest measure, and
comparing along the family shows whether one weak measure is dragging the
base score down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .edges import EdgeBelief, tail_probability
from .states import StateBelief, marginal_threat

__all__ = [
    "IndicatorReport",
    "collective_progress",
    "individual_threat",
    "pairwise_cohesion",
    "cell_size_integrity",
    "attack_indicators",
    "rank_cells",
]


def collective_progress(cell_belief: StateBelief, cell_threat_states: Sequence[int]) -> float:
    """m1: probability mass the cell filter puts on the attack-indicative states."""
    return marginal_threat(cell_belief, cell_threat_states)


def individual_threat(
    member_beliefs: Sequence[StateBelief], threat_states: Sequence[int]
) -> float:
    """m2: product over members of their individual threat mass."""
    value = 1.0
    for belief in member_beliefs:
        value *= marginal_threat(belief, threat_states)
    return value


def pairwise_cohesion(
    edge_beliefs: Sequence[EdgeBelief], threshold: float
) -> tuple[list[float], float]:
    """m3: per-pair exceedance probabilities and their product.

    Only communicating pairs (live edges among the members) contribute; a
    cell with no live internal edge yields the empty product 1, which the
    caller should treat as degenerate rather than as strong cohesion.
    """
    per_pair = [tail_probability(belief, threshold) for belief in edge_beliefs]
    cell_level = float(np.prod(per_pair)) if per_pair else 1.0
    return per_pair, cell_level


def cell_size_integrity(n: int, ideal_size: float) -> float:
    """m5: sech of the relative deviation from the ideal cell size.

    Near-ideal sizes score close to one; the penalty grows heavy only for
    large relative deviations.
    """
    if ideal_size <= 0:
        raise ValueError("ideal size must be positive")
    return 1.0 / math.cosh((n - ideal_size) / ideal_size)


def attack_indicators(measures: Sequence[float]) -> np.ndarray:
    """Ordered indicator family: partial products of the sorted measures.

    indicator[i] multiplies the largest 5 - i measures, so the family is
    non-decreasing in i.  Ties sort by original measure index to keep the
    permutation, and therefore every report, reproducible.
    """
    m = np.asarray(measures, dtype=float)
    if m.shape != (5,):
        raise ValueError("exactly five measures expected")
    if np.any((m < 0) | (m > 1)):
        raise ValueError("measures must lie in [0, 1]")
    order = sorted(range(5), key=lambda i: (-m[i], i))
    sorted_desc = m[order]
    return np.array([float(np.prod(sorted_desc[: 5 - i])) for i in range(5)])


@dataclass(frozen=True)
class IndicatorReport:
    """Per-cell measures and indicators at one tick, with an audit snapshot."""

    cell_id: str
    tick: int
    measures: tuple[float, float, float, float, float]
    indicators: tuple[float, float, float, float, float]
    inputs: Mapping[str, object] = field(default_factory=dict)

    @classmethod
    def build(cls, cell_id: str, tick: int, measures: Sequence[float],
              inputs: Mapping[str, object] | None = None) -> "IndicatorReport":
        phi = attack_indicators(measures)
        return cls(
            cell_id=str(cell_id),
            tick=int(tick),
            measures=tuple(float(v) for v in measures),
            indicators=tuple(float(v) for v in phi),
            inputs=dict(inputs or {}),
        )

    def rounded(self, digits: int = 2) -> dict:
        return {
            "m": [round(v, digits) for v in self.measures],
            "phi": [round(v, digits) for v in self.indicators],
        }

    def to_json_dict(self) -> dict:
        return {
            "cell_id": self.cell_id,
            "tick": self.tick,
            "m": list(self.measures),
            "phi": list(self.indicators),
            "inputs": dict(self.inputs),
        }

    def csv_row(self) -> list:
        return [self.tick, self.cell_id, *self.measures, *self.indicators]


CSV_HEADER = ["tick", "cell", "m1", "m2", "m3", "m4", "m5",
              "phi0", "phi1", "phi2", "phi3", "phi4"]


def rank_cells(reports: Sequence[IndicatorReport], key: int = 0) -> list[str]:
    """Cell ids ordered by the chosen indicator, highest first; ties by id."""
    if not 0 <= key <= 4:
        raise ValueError("indicator index must be in 0..4")
    return [
        r.cell_id
        for r in sorted(reports, key=lambda r: (-r.indicators[key], r.cell_id))
    ]
