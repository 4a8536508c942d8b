"""Quadratic variation, oscillation moments and Hölder norms."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .. import _kernels
from ..covariance import BifBmParams, TimeGrid, cov_matrix, increment_variance
from ..errors import EstimatorError, GridError, ParameterError
from ..sampler import SamplePath, cholesky_array
from ._common import ScalingFit, fit_scaling, path_arrays, restrict


def quadratic_variation(path, interval=(0.0, 1.0), component: int = 0) -> float:
    """Sum of squared increments over the grid points inside ``interval``."""
    t, y = restrict(*path_arrays(path, component), interval)
    if t.size < 2:
        raise EstimatorError("need at least two grid points in the interval")
    return float(np.sum(np.diff(y) ** 2))


def expected_quadratic_variation(t, p: BifBmParams) -> float:
    """Exact mean of the discrete quadratic variation on the points ``t``."""
    t = np.asarray(t, dtype=float)
    return float(np.sum(increment_variance(t[:-1], t[1:], p)))


def oscillation_moments(
    path, epsilon: float, k_max: int = 4, interval=(0.0, 1.0), component: int = 0
) -> list:
    """Trapezoidal ``int Z_eps(t)^k dt`` over ``interval`` for ``k = 1..k_max``.

    ``Z_eps(t) = (B(t + eps) - B(t)) / eps^HK``; ``B(t + eps)`` is read off
    the grid (linear interpolation when ``t + eps`` is not a node).
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    t, y = path_arrays(path, component)
    if isinstance(path, SamplePath):
        hk = path.params.hk
    else:
        raise EstimatorError("oscillation_moments needs a SamplePath (for HK)")
    t0, t1 = interval
    if t[-1] < t1 + epsilon * (1 - 1e-12):
        raise GridError("path must cover [t0, t1 + epsilon]")
    sel = (t >= t0) & (t <= t1)
    ts = t[sel]
    if ts.size < 2 or np.max(np.diff(t[(t >= t0) & (t <= t1 + epsilon)])) > epsilon / 8 * (1 + 1e-9):
        raise GridError("grid spacing must be at most epsilon / 8")
    shifted = np.interp(ts + epsilon, t, y)
    z = (shifted - y[sel]) / epsilon**hk
    return [float(np.trapezoid(z**k, ts)) for k in range(1, k_max + 1)]


def holder_norm(path, alpha: float, hk: Optional[float] = None, component: int = 0) -> float:
    """Discrete ``sup |y(s) - y(t)| / |s - t|^alpha`` over all grid pairs."""
    if isinstance(path, SamplePath):
        hk = path.params.hk
    if hk is not None and not 0 < alpha < hk:
        raise ParameterError(f"alpha must lie in (0, HK={hk:g})")
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    t, y = path_arrays(path, component)
    if t.size < 2:
        return 0.0
    return _kernels.holder_sup(t, y, alpha)


def holder_small_ball_mc(
    p: BifBmParams,
    alpha: float,
    eps_values,
    n_paths: int,
    n_grid: int,
    seed: int,
    batch: int = 256,
) -> ScalingFit:
    """Fit ``log(-log P{||B||_alpha <= eps})`` against ``log(1/eps)`` on [0, 1].

    Paths are exact (Cholesky) on ``n_grid`` equispaced points plus 0.
    """
    if not 0 < alpha < p.hk:
        raise ParameterError(f"alpha must lie in (0, HK={p.hk:g})")
    grid = TimeGrid.uniform(1.0, n_grid, include_zero=True)
    factor = cov_matrix(grid, p).factor
    norms = np.empty(n_paths)
    for start in range(0, n_paths, batch):
        m = min(batch, n_paths - start)
        arr = cholesky_array(grid, p, m, seed, 0, start, factor)
        norms[start : start + m] = [_kernels.holder_sup(grid.points, y, alpha) for y in arr]
    return _small_ball_fit(norms, eps_values, n_paths)


def _small_ball_fit(stat, x_values, n_paths) -> ScalingFit:
    x = np.asarray(x_values, dtype=float)
    probs = np.array([np.mean(stat <= v) for v in x])
    if np.any(probs == 0):
        raise EstimatorError(
            f"no path satisfied the event for x = {x[probs == 0].tolist()} with {n_paths} paths"
        )
    if np.any(probs == 1):
        raise EstimatorError("event has empirical probability 1; choose smaller x")
    extra = {"x": x.tolist(), "probabilities": probs.tolist(), "n_paths": int(n_paths)}
    return fit_scaling(np.log(1.0 / x), np.log(-np.log(probs)), extra)
