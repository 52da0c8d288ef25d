"""Side-by-side comparison of analytic approximations with simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import AnalyticReport
from .simulator import SimulationReport

__all__ = ["ComparisonRow", "ComparisonReport", "compare"]

METRICS = ("q", "r", "gamma")


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    class_index: int
    analytic: float
    simulated: float
    halfwidth: float
    abs_delta: float
    rel_delta: float | None
    covered: bool

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "class": self.class_index,
            "analytic": self.analytic,
            "simulated": self.simulated,
            "halfwidth": self.halfwidth,
            "abs_delta": self.abs_delta,
            "rel_delta": self.rel_delta,
            "covered": self.covered,
        }


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]

    def select(self, metric: str) -> list[ComparisonRow]:
        return [row for row in self.rows if row.metric == metric]

    def all_covered(self, metric: str = "gamma") -> bool:
        return all(row.covered for row in self.select(metric))

    def to_dict(self) -> dict:
        return {"rows": [row.to_dict() for row in self.rows]}


def _rel(delta: float, reference: float) -> float | None:
    if reference != 0.0:
        return delta / reference
    return 0.0 if delta == 0.0 else None


def compare(analytic: AnalyticReport, sim: SimulationReport) -> ComparisonReport:
    """Signed deltas are ``analytic - simulated``; ``covered`` is CI membership."""
    n = len(analytic.gamma)
    if len(sim.gamma_hat) != n:
        raise ValueError(f"class counts differ: analytic {n}, simulation {len(sim.gamma_hat)}")
    pairs = {
        "q": (analytic.q, sim.q_hat, sim.q_halfwidth),
        "r": (analytic.r, sim.r_hat, sim.r_halfwidth),
        "gamma": (analytic.gamma, sim.gamma_hat, sim.gamma_halfwidth),
    }
    rows = []
    for metric in METRICS:
        a, s, hw = (np.asarray(v, dtype=float) for v in pairs[metric])
        for i in range(n):
            delta = float(a[i] - s[i])
            rows.append(
                ComparisonRow(
                    metric=metric,
                    class_index=i + 1,
                    analytic=float(a[i]),
                    simulated=float(s[i]),
                    halfwidth=float(hw[i]),
                    abs_delta=delta,
                    rel_delta=_rel(delta, float(s[i])),
                    covered=bool(abs(delta) <= hw[i]),
                )
            )
    return ComparisonReport(rows)
