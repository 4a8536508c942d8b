"""Running-maximum statistics: Chung's normalisation and small-ball probabilities."""
from __future__ import annotations

import numpy as np

from .. import _kernels
from ..covariance import BifBmParams, TimeGrid, cov_matrix
from ..errors import EstimatorError, ParameterError
from ..sampler import SamplePath, cholesky_array
from ._common import ScalingFit, path_arrays
from .variations import _small_ball_fit

__all__ = ["chung_statistic", "small_ball_mc", "running_max_at"]


def running_max_at(t, y, radii) -> np.ndarray:
    """``max_{t_i <= r} |y_i|`` for each radius (0 when no point qualifies)."""
    m = _kernels.running_max_abs(y)
    idx = np.searchsorted(t, np.asarray(radii, dtype=float), side="right") - 1
    out = np.where(idx >= 0, m[np.clip(idx, 0, None)], 0.0)
    return out


def chung_statistic(path, radii, hk: float = None, component: int = 0) -> list:
    """``max_{[0, r]} |B| (log log 1/r)^HK / r^HK`` for each radius ``r < 1/e``."""
    if isinstance(path, SamplePath):
        hk = path.params.hk
    if hk is None:
        raise ParameterError("hk is required for raw arrays")
    r = np.asarray(radii, dtype=float)
    if np.any(r <= 0) or np.any(r >= np.exp(-1.0)):
        raise ParameterError("radii must lie in (0, 1/e) so that log log(1/r) > 0")
    t, y = path_arrays(path, component)
    if t[-1] < r.max() * (1 - 1e-12):
        raise EstimatorError("path does not cover [0, max radius]")
    m = running_max_at(t, y, r)
    return (m * np.log(np.log(1.0 / r)) ** hk / r**hk).tolist()


def small_ball_mc(
    p: BifBmParams,
    x_values,
    n_paths: int,
    n_grid: int,
    seed: int,
    batch: int = 512,
) -> ScalingFit:
    """Monte Carlo ``P{max_[0,1] |B| <= x}`` and the fit of ``log(-log P)``
    against ``log(1/x)``; the slope estimates ``1/HK``.

    Exact (Cholesky) paths on ``n_grid`` equispaced points of (0, 1].
    """
    if p.d != 1:
        raise ParameterError("small_ball_mc is one-dimensional")
    x = np.asarray(x_values, dtype=float)
    if np.any((x <= 0) | (x >= 1)) or np.any(np.diff(x) >= 0):
        raise ParameterError("x_values must be decreasing and inside (0, 1)")
    grid = TimeGrid.uniform(1.0, n_grid)
    factor = cov_matrix(grid, p).factor
    sup = np.empty(n_paths)
    for start in range(0, n_paths, batch):
        m = min(batch, n_paths - start)
        arr = cholesky_array(grid, p, m, seed, 0, start, factor)
        sup[start : start + m] = np.max(np.abs(arr), axis=1)
    fit = _small_ball_fit(sup, x, n_paths)
    fit.extra["n_grid"] = int(n_grid)
    return fit
