"""Box-counting dimension estimates and the reference dimension formulas."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .. import _kernels
from ..errors import EstimatorError, ParameterError
from ..sampler import SampleField, SamplePath
from ._common import ScalingFit, fit_scaling, path_arrays

__all__ = [
    "dyadic_scales",
    "box_count",
    "polyline_box_count",
    "level_set_points",
    "level_set_dimension",
    "graph_image_dimension",
    "image_dimension_reference",
    "graph_dimension_reference",
    "level_set_dimension_reference",
    "sheet_level_set_candidates",
]

# scales dropped at each end of the dyadic ladder before regression
TRIM = 2
# default level-set proximity as a fraction of the one-step increment scale
EPS_FRACTION = 0.5


def dyadic_scales(finest: float, coarsest: float = 0.5) -> np.ndarray:
    """``2^-j`` for all ``j`` with ``coarsest >= 2^-j >= finest``."""
    if not 0 < finest <= coarsest:
        raise ParameterError("need 0 < finest <= coarsest")
    j0 = int(np.ceil(-np.log2(coarsest) - 1e-12))
    j1 = int(np.floor(-np.log2(finest) + 1e-12))
    return 2.0 ** -np.arange(j0, j1 + 1)


def box_count(points, scale: float) -> int:
    """Number of grid cubes of side ``scale`` containing at least one point."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        return 0
    cells = np.floor(pts / scale).astype(np.int64)
    if cells.shape[1] == 1:
        return int(np.unique(cells[:, 0]).size)
    return int(np.unique(cells, axis=0).shape[0])


def _regress(scales, counts, trim: int, extra: dict) -> ScalingFit:
    scales = np.asarray(scales, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if trim and scales.size - 2 * trim >= 2:
        sl = slice(trim, scales.size - trim)
    else:
        sl = slice(None)
    extra = dict(extra, scales=scales.tolist(), counts=counts.tolist(), used=scales[sl].tolist())
    if np.any(counts[sl] <= 0):
        raise EstimatorError("empty box count at a regression scale")
    return fit_scaling(np.log(1.0 / scales[sl]), np.log(counts[sl]), extra)


def level_set_points(path, x: float, epsilon: float, interval=(0.0, 1.0), component: int = 0):
    """Grid times in ``interval`` with ``|B(t_i) - x| < epsilon``."""
    t, y = path_arrays(path, component)
    sel = (t >= interval[0]) & (t <= interval[1]) & (np.abs(y - x) < epsilon)
    return t[sel]


def level_set_dimension(
    path,
    x: float = 0.0,
    epsilon: Optional[float] = None,
    scales: Optional[Sequence[float]] = None,
    interval=(0.0, 1.0),
    component: int = 0,
    trim: int = TRIM,
) -> ScalingFit:
    """Box-counting slope of ``{t_i : |B(t_i) - x| < epsilon}``.

    Default scales run dyadically from 1/2 down to the largest grid spacing
    in ``interval``; default ``epsilon`` is ``EPS_FRACTION * (max spacing)^HK``,
    a fraction of the typical increment over one spacing. The two coarsest and two
    finest scales are dropped before the regression.
    """
    t, y = path_arrays(path, component)
    inside = t[(t >= interval[0]) & (t <= interval[1])]
    if inside.size < 2:
        raise EstimatorError("need at least two grid points in the interval")
    gap = float(np.max(np.diff(inside)))
    if epsilon is None:
        hk = path.params.hk if isinstance(path, SamplePath) else 0.5
        epsilon = EPS_FRACTION * gap**hk
    pts = level_set_points((t, y), x, epsilon, interval)
    if pts.size == 0:
        raise EstimatorError(f"no grid point within {epsilon:g} of level {x:g}")
    length = interval[1] - interval[0]
    if scales is None:
        scales = dyadic_scales(gap, 0.5 * length)
    scales = np.asarray(scales, dtype=float)
    counts = [box_count(pts - interval[0], s) for s in scales]
    return _regress(scales, counts, trim, {"epsilon": float(epsilon), "n_points": int(pts.size)})


def graph_image_dimension(
    obj,
    target: str = "graph",
    scales: Optional[Sequence[float]] = None,
    trim: int = TRIM,
) -> ScalingFit:
    """Box-counting slope of the graph ``{(t, B(t))}`` or the image ``B(T)``.

    One-parameter graphs use the column method: in each time column of
    width ``s`` the piecewise-linear graph needs ``floor(max/s) -
    floor(min/s) + 1`` boxes. One-parameter images count the cubes met by
    the piecewise-linear path (each segment subdivided below ``s / 4``);
    sheets count occupied cubes of the sampled point cloud.
    """
    if target not in ("graph", "image"):
        raise ParameterError("target must be 'graph' or 'image'")
    if isinstance(obj, SampleField):
        coords = obj.points()
        vals = obj.values.reshape(-1, obj.values.shape[-1])
        gap = max(float(np.max(np.diff(g.points))) if len(g) > 1 else 1.0 for g in obj.grids)
        cloud = vals if target == "image" else np.hstack([coords, vals])
        if scales is None:
            scales = _cloud_scales(vals, gap, obj.grids)
        counts = [box_count(cloud, s) for s in scales]
        return _regress(scales, counts, trim, {"target": target})
    if isinstance(obj, SamplePath):
        t, vals = obj.t, obj.values
    else:
        t, vals = (np.asarray(a, dtype=float) for a in obj)
        if vals.ndim == 1:
            vals = vals[:, None]
    if t.size < 2:
        raise EstimatorError("degenerate point cloud")
    gap = float(np.max(np.diff(t)))
    if scales is None:
        scales = (
            dyadic_scales(gap, 0.5 * (t[-1] - t[0]))
            if target == "graph"
            else _cloud_scales(vals, gap, None)
        )
    scales = np.asarray(scales, dtype=float)
    if target == "graph" and vals.shape[1] == 1:
        counts = [_kernels.graph_box_count(t, vals[:, 0], s) for s in scales]
    elif target == "graph":
        counts = [box_count(np.column_stack([t, vals]), s) for s in scales]
    else:
        counts = [polyline_box_count(vals, s) for s in scales]
    return _regress(scales, counts, trim, {"target": target})


def polyline_box_count(vals, scale: float) -> int:
    """Cubes of side ``scale`` met by the piecewise-linear path through ``vals``."""
    v = np.asarray(vals, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] < 2:
        return box_count(v, scale)
    seg = np.diff(v, axis=0)
    pieces = np.maximum(1, np.ceil(4.0 * np.linalg.norm(seg, axis=1) / scale)).astype(np.int64)
    idx = np.repeat(np.arange(seg.shape[0]), pieces)
    frac = (np.arange(pieces.sum()) - np.repeat(np.cumsum(pieces) - pieces, pieces)) / np.repeat(
        pieces, pieces
    )
    pts = np.vstack([v[idx] + seg[idx] * frac[:, None], v[-1:]])
    cells = np.floor(pts / scale).astype(np.int64)
    cells -= cells.min(axis=0)
    # one integer key per cell keeps the uniqueness test one-dimensional
    key = np.ravel_multi_index(tuple(cells.T), tuple(cells.max(axis=0) + 1))
    return int(np.unique(key).size)


def _cloud_scales(vals, gap, grids):
    # finest scale: the largest step between neighbouring samples, so the
    # sampled cloud still covers the continuous image at every scale used
    if grids is None:
        # polyline counting: the path is continuous between samples, so the
        # floor is set by the typical step, capped at 2^-10 of the span
        if len(vals) < 2:
            return 2.0 ** -np.arange(1, 9)
        span = float(np.max(np.ptp(vals, axis=0)))
        step = float(np.median(np.linalg.norm(np.diff(vals, axis=0), axis=1))) / 4
        if span <= 0:
            return 2.0 ** -np.arange(1, 9)
        return dyadic_scales(max(step, span / 1024), span)
    else:
        step = 0.0
        shape = tuple(len(g) for g in grids) + (vals.shape[-1],)
        v = vals.reshape(shape)
        for ax in range(len(grids)):
            if shape[ax] > 1:
                step = max(step, float(np.max(np.linalg.norm(np.diff(v, axis=ax), axis=-1))))
    span = float(np.max(np.ptp(vals, axis=0))) if len(vals) else 0.0
    if step <= 0 or span <= 0:
        return 2.0 ** -np.arange(1, 9)
    return dyadic_scales(step, max(span, step))


# ------------------------------------------------------------ references

def _sorted_hk(hk) -> np.ndarray:
    a = np.sort(np.atleast_1d(np.asarray(hk, dtype=float)))
    if np.any((a <= 0) | (a >= 1)):
        raise ParameterError("H_j K_j must lie in (0, 1)")
    return a


def image_dimension_reference(hk, d: int) -> float:
    """``min{d, sum_j 1/(H_j K_j)}`` for the image of ``[0, 1]^N``."""
    a = _sorted_hk(hk)
    return float(min(d, np.sum(1.0 / a)))


def graph_dimension_reference(hk, d: int) -> float:
    """Dimension of the graph over ``[0, 1]^N`` with ``H_1K_1 <= ... <= H_NK_N``."""
    a = _sorted_hk(hk)
    n = a.size
    inv = np.cumsum(1.0 / a)
    if inv[-1] <= d:
        return float(inv[-1])
    k = int(np.searchsorted(inv, d, side="right")) + 1  # first k with d < sum_{j<=k}
    ak = a[k - 1]
    return float(np.sum(ak / a[:k]) + n - k + (1 - ak) * d)


def level_set_dimension_reference(hk: float, d: int = 1) -> float:
    """``1 - HK d`` for one-parameter level sets."""
    return float(1.0 - hk * d)


def _level_formula(idx, d):
    a = np.sort(np.atleast_1d(np.asarray(idx, dtype=float)))
    n = a.size
    inv = np.cumsum(1.0 / a)
    if inv[-1] <= d:
        return None
    vals = [np.sum(a[k - 1] / a[:k]) + n - k - a[k - 1] * d for k in range(1, n + 1)]
    return float(min(vals))


def sheet_level_set_candidates(h, k, d: int) -> dict:
    """Both readings of the sheet level-set formula: with indices ``H_j``
    and with ``H_j K_j``. ``None`` marks an a.s. empty level set."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return {"index_H": _level_formula(h, d), "index_HK": _level_formula(h * k, d)}
