"""Level crossings of the smoothed path and their link to local time."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .. import _kernels
from ..errors import GridError, ParameterError
from ..sampler import SamplePath
from ._common import path_arrays
from .localtime import occupation_local_time

__all__ = ["smoothed_path", "level_crossings", "CrossingComparison", "crossing_count_localtime"]


def smoothed_path(t, y, epsilon: float, interval=(0.0, 1.0)):
    """``B_eps(t) = (1/eps) int_t^{t+eps} B(u) du`` at the grid points of ``interval``.

    This is the convolution with ``Phi_eps`` for ``Phi = 1_[-1, 0]``.
    Requires grid spacing at most ``eps / 8`` and coverage of
    ``[t0, t1 + eps]``.
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    t0, t1 = interval
    if t[-1] < t1 + epsilon * (1 - 1e-12):
        raise GridError("path must cover [t0, t1 + epsilon]")
    span = t[(t >= t0) & (t <= t1 + epsilon)]
    if span.size < 2 or np.max(np.diff(span)) > epsilon / 8 * (1 + 1e-9):
        raise GridError("grid spacing must be at most epsilon / 8")
    cum = cumulative_trapezoid(y, t, initial=0.0)
    sel = (t >= t0) & (t <= t1)
    ts = t[sel]
    upper = np.interp(ts + epsilon, t, cum)
    return ts, (upper - cum[sel]) / epsilon


def level_crossings(values, levels) -> np.ndarray:
    """Crossing count of each level by consecutive samples.

    Tie rule: a strict sign change of ``values - u`` counts once; each
    maximal run of samples exactly equal to ``u`` counts once.
    """
    return _kernels.crossing_counts(values, levels)


@dataclass(frozen=True)
class CrossingComparison:
    epsilons: np.ndarray
    crossing_integrals: np.ndarray
    localtime_integral: float

    @property
    def ratios(self) -> np.ndarray:
        return self.crossing_integrals / self.localtime_integral


def crossing_count_localtime(
    path,
    f: Callable,
    epsilons,
    u_grid,
    interval=(0.0, 1.0),
    hk: float = None,
    component: int = 0,
) -> CrossingComparison:
    """Normalised crossing integrals against the local-time integral.

    For each ``eps``: ``(pi/2)^{1/2} eps^{1-HK} sum_u f(u) N_u du`` where
    ``N_u`` counts crossings of ``u`` by ``B_eps`` on the grid. The
    comparator ``sum_u f(u) L(u, I) du`` uses the occupation density with
    bins of width ``du`` centred on ``u_grid`` (which must be equispaced
    multiples of ``du``).
    """
    if isinstance(path, SamplePath):
        hk = path.params.hk
    if hk is None:
        raise ParameterError("hk is required for raw arrays")
    t, y = path_arrays(path, component)
    u = np.asarray(u_grid, dtype=float)
    du = float(u[1] - u[0])
    if not np.allclose(np.diff(u), du, rtol=1e-9, atol=0):
        raise ParameterError("u_grid must be equispaced")
    if not np.allclose(u / du, np.round(u / du), atol=1e-6):
        raise ParameterError("u_grid must consist of multiples of its spacing")
    fu = np.asarray([f(v) for v in u], dtype=float)
    eps = np.asarray(epsilons, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ParameterError("epsilons must be decreasing")
    crossing = np.empty(eps.size)
    for i, e in enumerate(eps):
        _, be = smoothed_path(t, y, e, interval)
        counts = level_crossings(be, u)
        crossing[i] = np.sqrt(np.pi / 2) * e ** (1 - hk) * np.sum(fu * counts) * du
    lt = occupation_local_time((t, y), interval, du)
    lvals = np.array([lt.at(v) for v in u])
    return CrossingComparison(eps, crossing, float(np.sum(fu * lvals) * du))
