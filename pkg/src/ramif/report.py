"""Verification reports shared by the integral and identity checks."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

STATUSES = ("pass", "fail", "informational")


@dataclass
class VerificationReport:
    name: str
    points: List = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    tolerance: float = 0.0
    params: dict = field(default_factory=dict)
    informational: bool = False
    seconds: float = 0.0
    details: dict = field(default_factory=dict)
    # per-point tolerance and whether the residual must stay below ("max") or above ("min") it
    tolerances: List[float] = field(default_factory=list)
    kinds: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.informational:
            return True
        return bool(self.residuals) and all(
            _ok(r, t, k) for r, t, k in zip(self.residuals, self.tolerances, self.kinds))

    @property
    def status(self) -> str:
        if self.informational:
            return "informational"
        return "pass" if self.passed else "fail"

    @property
    def worst(self) -> float:
        """Largest residual among the upper-bounded points."""
        vals = [r for r, k in zip(self.residuals, self.kinds) if k == "max"]
        return max(vals) if vals else math.nan

    def add(self, point, residual: float, tolerance: Optional[float] = None, minimum: bool = False):
        """Record a residual; with minimum=True it has to exceed the tolerance."""
        self.points.append(point)
        self.residuals.append(float(residual))
        self.tolerances.append(self.tolerance if tolerance is None else float(tolerance))
        self.kinds.append("min" if minimum else "max")

    @property
    def failures(self) -> list:
        return [p for p, r, t, k in zip(self.points, self.residuals, self.tolerances, self.kinds)
                if not _ok(r, t, k)]

    def to_json_dict(self, timing: bool = False) -> dict:
        # timing is off by default so identical runs give identical JSON
        out = {
            "identity": self.name,
            "points": [_point_str(p) for p in self.points],
            "residuals": self.residuals,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "status": self.status,
            "params": self.params,
        }
        if self.mixed or "min" in self.kinds:
            out["tolerances"] = self.tolerances
            out["kinds"] = self.kinds
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out

    def merge(self, other: "VerificationReport", prefix: str = "") -> "VerificationReport":
        for p, r, t, k in zip(other.points, other.residuals, other.tolerances, other.kinds):
            self.add(f"{prefix}{_point_str(p)}", r, t, k == "min")
        self.seconds += other.seconds
        return self

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_json_dict(timing), sort_keys=True)

    @property
    def mixed(self) -> bool:
        return any(t != self.tolerance for t in self.tolerances)

    @property
    def worst_ratio(self) -> float:
        """Largest residual / tolerance among the upper-bounded points (0 tolerances skipped)."""
        vals = [r / t for r, t, k in zip(self.residuals, self.tolerances, self.kinds) if k == "max" and t > 0]
        return max(vals) if vals else math.nan

    def summary(self) -> str:
        if self.mixed:
            tol = f"per-point tolerances, worst residual/tolerance {self.worst_ratio:.3g}"
        else:
            tol = f"tolerance {self.tolerance:.1g}"
        line = f"{self.status.upper():4s} {self.name}: worst {self.worst:.3g} ({tol}, {self.seconds:.1f}s)"
        bad = self.failures
        if bad and not self.informational:
            line += f"; failing at {', '.join(_point_str(p) for p in bad[:4])}"
        return line


def _ok(r: float, tol: float, kind: str) -> bool:
    if math.isnan(r):
        return False
    return r > tol if kind == "min" else r <= tol


def _point_str(p) -> str:
    if isinstance(p, complex):
        return f"{p.real:g}{p.imag:+g}i"
    return str(p)


class Timer:
    def __init__(self, report: Optional[VerificationReport] = None):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        if self.report is not None:
            self.report.seconds += time.perf_counter() - self.t0
        return False
