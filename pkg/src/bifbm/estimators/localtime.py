"""Occupation densities (local times) and functionals built on them."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .. import _kernels
from ..covariance import BifBmParams, TimeGrid
from ..errors import EstimatorError, ParameterError
from ..sampler import SamplePath, lamperti_array
from ._common import ScalingFit, fit_scaling, mean_se

__all__ = [
    "LocalTimeEstimate",
    "occupation_local_time",
    "occupation_weights",
    "local_time_at",
    "expected_local_time",
    "local_time_holder",
    "local_time_tail",
    "renormalization_functional",
]


class ExistenceWarning(UserWarning):
    """Local time is not guaranteed to exist (d * HK >= 1)."""


@dataclass(frozen=True)
class LocalTimeEstimate:
    """Binned occupation density on ``[t0, t1]``.

    ``values`` has one axis per state-space dimension; bin ``i`` along an axis
    is centred at ``x_centers[axis][i]`` and has width ``bandwidth``.
    """

    x_centers: tuple
    interval: tuple
    values: np.ndarray
    bandwidth: float
    n_grid: int
    regime_ok: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def d(self) -> int:
        return self.values.ndim

    def mass(self) -> float:
        return float(np.sum(self.values) * self.bandwidth**self.d)

    def at(self, x) -> float:
        """Density of the bin containing ``x`` (0 outside the support)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = []
        for a, c in enumerate(self.x_centers):
            i = int(np.floor(x[a] / self.bandwidth + 0.5)) - int(round(c[0] / self.bandwidth))
            if not 0 <= i < c.size:
                return 0.0
            idx.append(i)
        return float(self.values[tuple(idx)])

    def sup(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0


def occupation_weights(t, interval) -> tuple:
    """Grid points in ``interval`` and their Voronoi cells clipped to it.

    The weights sum to the interval length, so every occupation measure
    built from them has the right total mass.
    """
    t0, t1 = float(interval[0]), float(interval[1])
    if not t1 >= t0:
        raise EstimatorError("empty interval")
    sel = np.flatnonzero((t >= t0) & (t <= t1))
    if sel.size == 0:
        if t1 > t0:
            raise EstimatorError("no grid point inside the interval")
        return sel, np.zeros(0)
    ts = t[sel]
    mids = 0.5 * (ts[:-1] + ts[1:])
    left = np.concatenate([[t0], mids])
    right = np.concatenate([mids, [t1]])
    return sel, right - left


def _bin_index(y, bandwidth):
    return np.floor(y / bandwidth + 0.5).astype(np.int64)


def occupation_local_time(
    path,
    interval=(0.0, 1.0),
    bandwidth: Optional[float] = None,
    hk: Optional[float] = None,
) -> LocalTimeEstimate:
    """Histogram estimate of ``L(x, I)``: time spent per spatial bin / bin volume.

    Bins are centred on multiples of ``bandwidth`` (default ``n^-HK`` with
    ``n`` the number of grid points in ``I``). All components of the path
    are used, so the estimate lives on ``R^d``.
    """
    if isinstance(path, SamplePath):
        t, y, hk = path.t, path.values, path.params.hk
    else:
        t, y = (np.asarray(a, dtype=float) for a in path)
        if y.ndim == 1:
            y = y[:, None]
    d = y.shape[1]
    sel, w = occupation_weights(t, interval)
    n = sel.size
    if bandwidth is None:
        if hk is None:
            raise ParameterError("bandwidth or hk is required")
        bandwidth = max(n, 2) ** (-hk)
    if not bandwidth > 0:
        raise ParameterError("bandwidth must be positive")
    regime_ok = hk is None or d * hk < 1
    if not regime_ok:
        warnings.warn(f"d*HK = {d * hk:g} >= 1: local time need not exist", ExistenceWarning)
    if n == 0:
        empty = tuple(np.zeros(1) for _ in range(d))
        return LocalTimeEstimate(empty, tuple(interval), np.zeros((1,) * d), bandwidth, 0, regime_ok)
    idx = _bin_index(y[sel], bandwidth)
    lo = idx.min(axis=0)
    hi = idx.max(axis=0)
    shape = tuple(int(v) for v in hi - lo + 1)
    if d == 1:
        vals = _kernels.weighted_hist(
            y[sel, 0], w, (lo[0] - 0.5) * bandwidth, bandwidth, shape[0]
        )
    else:
        flat = np.ravel_multi_index(tuple((idx - lo).T), shape)
        vals = np.bincount(flat, weights=w, minlength=int(np.prod(shape))).reshape(shape)
    vals = vals / bandwidth**d
    centers = tuple(np.arange(lo[a], hi[a] + 1) * bandwidth for a in range(d))
    return LocalTimeEstimate(centers, (float(interval[0]), float(interval[1])), vals, float(bandwidth), n, regime_ok)


def local_time_at(t, y, x, bandwidth, interval=(0.0, 1.0)) -> float:
    """Density of the single bin centred at ``x`` (fast path for Monte Carlo)."""
    sel, w = occupation_weights(t, interval)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    x = np.atleast_1d(np.asarray(x, dtype=float))
    inside = np.all(np.abs(y[sel] - x) < bandwidth / 2, axis=1)
    return float(np.sum(w[inside]) / bandwidth ** y.shape[1])


def expected_local_time(p: BifBmParams, t: float = 1.0, x=0.0) -> float:
    """``E L(x, [0, t]) = int_0^t p_{u^2HK}(x) du`` with ``p_v`` the N(0, vI) density."""
    d = p.d
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if d * p.hk >= 1:
        raise ParameterError("expected local time is infinite when d*HK >= 1")
    if np.all(x == 0):
        return float((2 * np.pi) ** (-d / 2) * t ** (1 - d * p.hk) / (1 - d * p.hk))
    r2 = float(x @ x)

    def dens(u):
        v = u ** (2 * p.hk)
        return (2 * np.pi * v) ** (-d / 2) * np.exp(-r2 / (2 * v))

    return float(integrate.quad(dens, 0.0, t, limit=200)[0])


def local_time_holder(
    paths: Sequence,
    t0: float,
    radii,
    bandwidth_fraction: float = 1.0 / 16,
) -> ScalingFit:
    """Growth of ``L*(B(t0, r)) = sup_x L(x, [t0 - r, t0 + r])`` in ``r``.

    Fits the path-averaged ``log L*`` against ``log r``; the slope estimates
    ``1 - HKd``. ``extra["ratio"]`` is the averaged ``L* / phi_1(r)`` with
    ``phi_1(r) = r^(1-HKd) (log log 1/r)^HKd``. The bandwidth at radius
    ``r`` is ``bandwidth_fraction * r^HK`` so bins resolve the local range.
    """
    r = np.asarray(radii, dtype=float)
    if np.any(r >= np.exp(-1.0)) or np.any(r <= 0) or np.any(np.diff(r) >= 0):
        raise ParameterError("radii must be decreasing and inside (0, 1/e)")
    if not paths:
        raise EstimatorError("no paths")
    hk = paths[0].params.hk
    d = paths[0].d
    lstar = np.empty((len(paths), r.size))
    for i, path in enumerate(paths):
        for j, rad in enumerate(r):
            est = occupation_local_time(
                path, (max(t0 - rad, 0.0), t0 + rad), bandwidth_fraction * rad**hk
            )
            lstar[i, j] = est.sup()
    phi1 = r ** (1 - hk * d) * np.log(np.log(1.0 / r)) ** (hk * d)
    ratio = np.mean(lstar / phi1, axis=0)
    extra = {"radii": r.tolist(), "ratio": ratio.tolist(), "lstar_mean": lstar.mean(axis=0).tolist()}
    return fit_scaling(np.log(r), np.mean(np.log(lstar), axis=0), extra)


def local_time_tail(
    p: BifBmParams,
    x_values,
    n_paths: int,
    seed: int,
    n_grid: int = 2**14,
    t_min: float = 2.0**-16,
) -> ScalingFit:
    """Report-only Monte Carlo tail of ``L(0, [0, 1])``.

    Fits ``log(-log P{L > x})`` against ``log x``; the slope is the tail
    exponent. Points with no exceedance are omitted. ``extra`` also holds
    the linear fit of ``-log P`` against ``x^HK``.
    """
    if p.d * p.hk >= 1:
        raise ParameterError("local time needs d*HK < 1")
    grid = TimeGrid.log_uniform(t_min, 1.0, n_grid, include_zero=True)
    bw = n_grid ** (-p.hk)
    lt = np.empty(n_paths)
    comps = [lamperti_array(grid, p, n_paths, seed, "circulant", c)[0] for c in range(p.d)]
    for j in range(n_paths):
        y = np.stack([c[j] for c in comps], axis=1)
        lt[j] = local_time_at(grid.points, y, np.zeros(p.d), bw)
    x = np.asarray(x_values, dtype=float)
    probs = np.array([np.mean(lt > v) for v in x])
    keep = (probs > 0) & (probs < 1)
    if keep.sum() < 2:
        raise EstimatorError("fewer than two usable tail points")
    xs, nl = x[keep], -np.log(probs[keep])
    lin = np.polyfit(xs**p.hk, nl, 1)
    extra = {
        "x": xs.tolist(),
        "probabilities": probs[keep].tolist(),
        "neg_log_p": nl.tolist(),
        "slope_vs_x_pow_hk": float(lin[0]),
        "mean_local_time": mean_se(lt),
    }
    return fit_scaling(np.log(xs), np.log(nl), extra)


def renormalization_functional(
    path, F: Callable, hk: Optional[float] = None, t_end: Optional[float] = None
) -> float:
    """``T^(HK-1) int_0^T F(B(u)) du`` by the trapezoidal rule on the grid."""
    if isinstance(path, SamplePath):
        t, y, hk = path.t, path.values, path.params.hk
    else:
        t, y = (np.asarray(a, dtype=float) for a in path)
    if hk is None:
        raise ParameterError("hk is required for raw arrays")
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    T = float(t[-1]) if t_end is None else float(t_end)
    sel = t <= T
    vals = np.asarray(F(y[sel]), dtype=float)
    return float(T ** (hk - 1.0) * np.trapezoid(vals, t[sel]))
