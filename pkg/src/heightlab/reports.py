"""Report value types shared across modules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class DensityReport:
    """Numerical integral with an error estimate from two node counts."""

    value: float
    est_error: float
    nodes: int
    method: str

    def scaled(self, factor: float) -> DensityReport:
        return DensityReport(self.value * factor, self.est_error * factor, self.nodes, self.method)


@dataclass(frozen=True)
class EnergyReport:
    value: float
    quadrature_nodes: int
    est_error: float

    def shifted(self, c: float) -> EnergyReport:
        return EnergyReport(self.value + c, self.quadrature_nodes, self.est_error)


# relative floor below which a slack counts as numerically zero
SLACK_FLOOR = 1e-12


@dataclass(frozen=True)
class InequalityReport:
    """Check of lhs <= rhs.

    verdict is "inconclusive" when |slack| is within the combined error bar
    (plus a tiny relative floor), otherwise "satisfied" or "violated".
    """

    lhs: float
    rhs: float
    slack: float
    verdict: str
    error: float = 0.0
    inputs: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    @classmethod
    def make(cls, lhs: float, rhs: float, error: float = 0.0,
             inputs: dict | None = None, note: str = "") -> InequalityReport:
        slack = rhs - lhs
        band = error + SLACK_FLOOR * max(1.0, abs(lhs), abs(rhs))
        if math.isnan(slack):
            verdict = "inconclusive"
        elif slack == 0 and error == 0:
            # exact equality with exact inputs: the non-strict inequality holds
            verdict = "satisfied"
        elif abs(slack) <= band:
            verdict = "inconclusive"
        elif slack > 0:
            verdict = "satisfied"
        else:
            verdict = "violated"
        return cls(lhs, rhs, slack, verdict, error, dict(inputs or {}), note)

    @property
    def holds(self) -> bool:
        """True unless the inequality is violated beyond the error bar."""
        return self.verdict != "violated"
