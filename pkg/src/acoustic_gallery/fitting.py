"""Least-squares slope fits on dyadic ladders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class ScalingFit:
    """Slope of log2(value) against a ladder variable, with a verdict."""

    js: np.ndarray
    log2_values: np.ndarray
    slope: float
    intercept: float
    stderr: float
    predicted_slope: float
    tolerance: float = 0.1
    name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.predicted_slope) <= self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict:
        return {"name": self.name, "js": [float(j) for j in self.js],
                "log2_values": [float(v) for v in self.log2_values],
                "slope": self.slope, "intercept": self.intercept, "stderr": self.stderr,
                "predicted_slope": self.predicted_slope, "tolerance": self.tolerance,
                "verdict": self.verdict, **self.extra}


def fit_slope(xs, values, predicted: float, tolerance: float = 0.1, name: str = "",
              log_base_x: float | None = None, **extra) -> ScalingFit:
    """Fit log2(values) = slope * x + intercept.

    With ``log_base_x`` set, x is replaced by log_{base}(x) (for power-law
    fits against a continuous variable such as lambda).
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.size < 2 or xs.size != values.size:
        raise ValueError("need at least two matching samples")
    if np.any(values <= 0):
        raise ValueError("values must be positive for a log fit")
    ys = np.log2(values)
    xfit = xs if log_base_x is None else np.log(xs) / math.log(log_base_x)
    if log_base_x is not None:
        ys = np.log(values) / math.log(log_base_x)
    if xs.size == 2:
        slope = float((ys[1] - ys[0]) / (xfit[1] - xfit[0]))
        intercept = float(ys[0] - slope * xfit[0])
        stderr = 0.0
    else:
        res = stats.linregress(xfit, ys)
        slope, intercept, stderr = float(res.slope), float(res.intercept), float(res.stderr)
    return ScalingFit(xs, ys, slope, intercept, stderr, float(predicted), tolerance, name, extra)
