"""Shared plumbing: scaling regressions, path unpacking, CSV rows."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from ..errors import EstimatorError
from ..sampler import SamplePath


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line ``ordinates ~ slope * abscissae + intercept``.

    Both arrays are already on log scale; ``extra`` holds estimator-specific
    diagnostics (raw probabilities, ratio sequences, ...).
    """

    abscissae: np.ndarray
    ordinates: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "abscissae": [float(v) for v in self.abscissae],
            "ordinates": [float(v) for v in self.ordinates],
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "r_squared": float(self.r_squared),
        }


def fit_scaling(x, y, extra: Optional[dict] = None) -> ScalingFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise EstimatorError("a scaling fit needs at least two matched points")
    dx = np.diff(x)
    if not (np.all(dx > 0) or np.all(dx < 0)):
        raise EstimatorError("abscissae must be strictly monotone")
    if not np.all(np.isfinite(y)):
        raise EstimatorError("ordinates must be finite")
    if x.size == 2 or np.ptp(y) == 0:
        slope = (y[-1] - y[0]) / (x[-1] - x[0])
        icpt = float(np.mean(y - slope * x))
        r2 = 1.0
    else:
        res = stats.linregress(x, y)
        slope, icpt, r2 = res.slope, res.intercept, res.rvalue**2
    return ScalingFit(x, y, float(slope), float(icpt), float(min(max(r2, 0.0), 1.0)), extra or {})


def path_arrays(path, component: int = 0):
    """``(t, y)`` from a SamplePath or a ``(t, y)`` pair."""
    if isinstance(path, SamplePath):
        return path.t, path.values[:, component]
    t, y = path
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if t.shape[0] != y.shape[0]:
        raise EstimatorError("t and y lengths differ")
    return t, y


def restrict(t, y, interval):
    t0, t1 = interval
    if not t1 >= t0:
        raise EstimatorError("empty interval")
    sel = (t >= t0) & (t <= t1)
    return t[sel], y[sel]


ROW_FIELDS = ("estimator", "parameters", "value", "stderr", "n")


@dataclass(frozen=True)
class EstimatorRow:
    estimator: str
    parameters: dict
    value: float
    stderr: float = float("nan")
    n: int = 1

    def as_list(self):
        return [
            self.estimator,
            json.dumps(self.parameters, sort_keys=True),
            repr(float(self.value)),
            repr(float(self.stderr)),
            int(self.n),
        ]


def write_rows(rows, dest) -> Path:
    dest = Path(dest)
    with dest.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow(r.as_list())
    return dest


def mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), float("nan")
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))
