"""The record every verifier returns."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class EstimateReport:
    """Outcome of one numerically checked inequality ``lhs <= C * rhs``.

    ``ratio`` is ``lhs / rhs``; a report passes when ``ratio <= tolerance``.
    Deviation-type checks (identities) store the deviation in ``lhs`` with
    ``rhs = 1``.  When both sides vanish the ratio is 0 and the report is
    marked trivial.
    """

    label: str
    lhs: float
    rhs: float
    tolerance: float
    ratio: float = math.nan
    passed: bool = False
    trivial: bool = False
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        if math.isnan(self.ratio):
            if self.rhs > 0:
                self.ratio = self.lhs / self.rhs
            elif self.lhs == 0:
                self.ratio = 0.0
                self.trivial = True
            else:
                self.ratio = math.inf
        self.ratio = float(self.ratio)
        self.passed = bool(math.isfinite(self.ratio) and self.ratio <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "trivial": self.trivial,
            "metadata": self.metadata,
        }


def deviation_report(label: str, deviation: float, tolerance: float, **metadata) -> EstimateReport:
    return EstimateReport(label, deviation, 1.0, tolerance, ratio=float(deviation), metadata=metadata)
