"""Closed-form kernels of bifractional Brownian motion and Gaussian conditioning.

Every function here is a pure function of its inputs. Array arguments
broadcast with numpy rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import (
    GridError,
    NotPositiveDefiniteError,
    ParameterError,
    SingularConditionerError,
)

__all__ = [
    "BifBmParams",
    "SheetParams",
    "TimeGrid",
    "CovarianceMatrix",
    "JITTER_LEVELS",
    "cov_bifbm",
    "cov_sheet",
    "increment_variance",
    "lamperti_cov",
    "q_function",
    "cov_matrix",
    "cholesky_with_jitter",
    "conditional_variance",
]

# Relative diagonal jitter tried in order when a Gram matrix fails to factorise.
JITTER_LEVELS = (0.0, 1e-14, 1e-12, 1e-10)


@dataclass(frozen=True)
class BifBmParams:
    """Exponents ``h`` in (0, 1), ``k`` in (0, 1] and state-space dimension ``d``."""

    h: float
    k: float
    d: int = 1

    def __post_init__(self):
        h, k, d = self.h, self.k, self.d
        if not (np.isfinite(h) and 0.0 < h < 1.0):
            raise ParameterError(f"h must lie in (0, 1), got {h!r}")
        if not (np.isfinite(k) and 0.0 < k <= 1.0):
            raise ParameterError(f"k must lie in (0, 1], got {k!r}")
        if int(d) != d or d < 1:
            raise ParameterError(f"d must be a positive integer, got {d!r}")
        object.__setattr__(self, "h", float(h))
        object.__setattr__(self, "k", float(k))
        object.__setattr__(self, "d", int(d))

    @property
    def hk(self) -> float:
        """Self-similarity index."""
        return self.h * self.k

    @property
    def beta_decay(self) -> float:
        """``min{H(2-K), HK}``, the decay rate quoted for the Lamperti covariance.

        Only a valid bound when ``HK <= 1/2``; see ``decay_rate``.
        """
        return min(self.h * (2.0 - self.k), self.hk)

    @property
    def decay_rate(self) -> float:
        """Exact exponential decay rate ``min{H(2-K), 1-HK}`` of ``r(t)``.

        Large-lag expansion: ``r(t) ~ 2^-K (K e^{-H(2-K)t} + 2HK e^{-(1-HK)t})``.
        """
        return min(self.h * (2.0 - self.k), 1.0 - self.hk)

    @property
    def has_local_time(self) -> bool:
        return self.d * self.hk < 1.0

    def to_dict(self) -> dict:
        return {"h": self.h, "k": self.k, "d": self.d}


@dataclass(frozen=True)
class SheetParams:
    """Exponent matrices of an (N, d) bifractional Brownian sheet.

    ``hbar[i, j]`` and ``kbar[i, j]`` are the exponents of component ``i``
    along time axis ``j``; both arrays have shape ``(d, N)``.
    """

    hbar: np.ndarray
    kbar: np.ndarray

    def __post_init__(self):
        hbar = np.atleast_2d(np.asarray(self.hbar, dtype=float))
        kbar = np.atleast_2d(np.asarray(self.kbar, dtype=float))
        if hbar.shape != kbar.shape or hbar.ndim != 2:
            raise ParameterError(
                f"hbar and kbar must be d x N matrices of equal shape, got "
                f"{hbar.shape} and {kbar.shape}"
            )
        if not np.all((hbar > 0) & (hbar < 1)):
            raise ParameterError("every H_ij must lie in (0, 1)")
        if not np.all((kbar > 0) & (kbar <= 1)):
            raise ParameterError("every K_ij must lie in (0, 1]")
        hbar.setflags(write=False)
        kbar.setflags(write=False)
        object.__setattr__(self, "hbar", hbar)
        object.__setattr__(self, "kbar", kbar)

    @classmethod
    def isotropic(cls, h, k, d: int = 1) -> "SheetParams":
        """Same per-axis exponents ``h[j], k[j]`` for every component."""
        h = np.atleast_1d(np.asarray(h, dtype=float))
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return cls(np.tile(h, (d, 1)), np.tile(k, (d, 1)))

    @property
    def d(self) -> int:
        return self.hbar.shape[0]

    @property
    def n_params(self) -> int:
        return self.hbar.shape[1]

    @property
    def hstar(self) -> np.ndarray:
        return self.hbar.max(axis=0)

    @property
    def kstar(self) -> np.ndarray:
        return self.kbar.max(axis=0)

    @property
    def hk(self) -> np.ndarray:
        return self.hbar * self.kbar

    def axis(self, i: int, j: int) -> BifBmParams:
        return BifBmParams(self.hbar[i, j], self.kbar[i, j])

    def to_dict(self) -> dict:
        return {"hbar": self.hbar.tolist(), "kbar": self.kbar.tolist()}


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, nonnegative sampling times."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise GridError("grid must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise GridError("grid points must be finite")
        if pts[0] < 0:
            raise GridError("grid points must be nonnegative")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise GridError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    @classmethod
    def uniform(cls, t_max: float, n: int, include_zero: bool = False) -> "TimeGrid":
        """``n`` equispaced points ending at ``t_max`` (spacing ``t_max / n``)."""
        if n < 1:
            raise GridError("grid must be nonempty")
        pts = t_max * np.arange(1, n + 1) / n
        if include_zero:
            pts = np.concatenate([[0.0], pts])
        return cls(pts)

    @classmethod
    def log_uniform(
        cls, t_min: float, t_max: float, n: int, include_zero: bool = False
    ) -> "TimeGrid":
        """``n`` geometrically spaced points from ``t_min`` to ``t_max``.

        This is the grid on which the Lamperti samplers are exact.
        """
        if n < 1:
            raise GridError("grid must be nonempty")
        if not 0 < t_min <= t_max:
            raise GridError("need 0 < t_min <= t_max")
        if n == 1:
            pts = np.array([t_max])
        else:
            u = np.linspace(np.log(t_min), np.log(t_max), n)
            pts = np.exp(u)
            pts[-1] = t_max
        if include_zero:
            pts = np.concatenate([[0.0], pts])
        return cls(pts)

    @property
    def has_zero(self) -> bool:
        return self.points[0] == 0.0

    @property
    def positive(self) -> np.ndarray:
        return self.points[1:] if self.has_zero else self.points

    def log_step(self, rtol: float = 1e-9) -> Optional[float]:
        """Common spacing of ``log t`` over the positive points, or None."""
        pos = self.positive
        if pos.size < 2:
            return 0.0 if pos.size == 1 else None
        du = np.diff(np.log(pos))
        step = (np.log(pos[-1]) - np.log(pos[0])) / (pos.size - 1)
        if np.max(np.abs(du - step)) > rtol * max(1.0, abs(step)) + 1e-12:
            return None
        return float(step)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Gram matrix of a kernel on a grid with its lower Cholesky factor.

    ``factor @ factor.T`` reproduces ``entries + jitter_applied * I`` on the
    rows that are not identically zero; zero rows (points at t = 0) stay zero.
    """

    entries: np.ndarray
    jitter_applied: float = 0.0
    factor: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _check_params(p):
    if not isinstance(p, BifBmParams):
        raise ParameterError(f"expected BifBmParams, got {type(p).__name__}")


def _kernel(s, t, h, k):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ParameterError("times must be nonnegative")
    hk = h * k
    return 2.0 ** (-k) * ((t ** (2 * h) + s ** (2 * h)) ** k - np.abs(t - s) ** (2 * hk))


def cov_bifbm(s, t, p: BifBmParams):
    """Covariance ``2^-K [(t^2H + s^2H)^K - |t-s|^2HK]``."""
    _check_params(p)
    out = _kernel(s, t, p.h, p.k)
    return float(out) if out.ndim == 0 else out


def cov_sheet(s, t, i: int, p: SheetParams) -> float:
    """Product covariance of component ``i`` (0-based) of a sheet at ``s`` and ``t``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if s.shape != (p.n_params,) or t.shape != (p.n_params,):
        raise ParameterError(
            f"points must have {p.n_params} coordinates, got {s.shape} and {t.shape}"
        )
    if not 0 <= i < p.d:
        raise ParameterError(f"component index {i} out of range for d={p.d}")
    out = 1.0
    for j in range(p.n_params):
        out *= float(_kernel(s[j], t[j], p.hbar[i, j], p.kbar[i, j]))
    return out


def increment_variance(s, t, p: BifBmParams):
    """``E[(B(t) - B(s))^2]``."""
    _check_params(p)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    two_hk = 2 * p.hk
    out = t**two_hk + s**two_hk - 2.0 * _kernel(s, t, p.h, p.k)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def lamperti_cov(tau, p: BifBmParams):
    """Covariance ``r(tau)`` of the stationary process ``e^{-HK u} B(e^u)``.

    Evaluated as ``2^-K e^{HK tau} e^b expm1(a - b)`` with
    ``a = K log1p(e^{-2H tau})`` and ``b = 2HK log1p(-e^{-tau})``, which
    avoids the cancellation of the textbook form at large lags.
    """
    _check_params(p)
    tau = np.abs(np.asarray(tau, dtype=float))
    h, k, hk = p.h, p.k, p.hk
    out = np.ones_like(tau)
    pos = tau > 0
    x = tau[pos]
    a = k * np.log1p(np.exp(-2 * h * x))
    # log(1 - e^{-x}) accurate at both ends
    small = x <= np.log(2.0)
    l1m = np.empty_like(x)
    l1m[small] = np.log(-np.expm1(-x[small]))
    l1m[~small] = np.log1p(-np.exp(-x[~small]))
    b = 2 * hk * l1m
    out[pos] = 2.0 ** (-k) * np.exp(hk * x + b) * np.expm1(a - b)
    return float(out) if out.ndim == 0 else out


def q_function(z, h: float, k: float):
    """``Q(z) = R(1, z) / z^HK`` on [0, 1] with ``Q(0) = 0``."""
    BifBmParams(h, k)
    z = np.asarray(z, dtype=float)
    if np.any((z < 0) | (z > 1)):
        raise ParameterError("q_function is defined on [0, 1]")
    out = np.zeros_like(z)
    pos = z > 0
    zp = z[pos]
    out[pos] = _kernel(1.0, zp, h, k) / zp ** (h * k)
    return float(out) if out.ndim == 0 else out


def cholesky_with_jitter(a: np.ndarray, levels: Iterable[float] = JITTER_LEVELS):
    """Lower Cholesky factor of ``a`` with escalating relative diagonal jitter.

    Returns ``(factor, jitter)`` where ``jitter`` is the absolute amount added
    to the diagonal. Raises NotPositiveDefiniteError when every level fails.
    """
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    scale = float(np.max(np.diag(a)))
    if not scale > 0:
        raise NotPositiveDefiniteError("matrix has no positive diagonal entry")
    last = None
    for level in levels:
        jitter = level * scale
        work = a.copy()
        if jitter:
            work[np.diag_indices(n)] += jitter
        try:
            factor = scipy.linalg.cholesky(
                work, lower=True, overwrite_a=True, check_finite=False
            )
        except np.linalg.LinAlgError as exc:
            last = exc
            continue
        if np.all(np.isfinite(factor)):
            return factor, jitter
    raise NotPositiveDefiniteError(
        f"Cholesky failed at maximum jitter {levels[-1]:g} (relative): {last}"
    )


def cov_matrix(grid: TimeGrid, p: BifBmParams, factorize: bool = True) -> CovarianceMatrix:
    """Gram matrix of the bi-fBm kernel on ``grid``, with its Cholesky factor.

    Points at ``t = 0`` give identically zero rows; they are excluded from the
    factorisation and receive zero rows in the factor.
    """
    _check_params(p)
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(grid)
    entries = _kernels.gram_bifbm(grid.points, p.h, p.k)
    entries.setflags(write=False)
    if not factorize:
        return CovarianceMatrix(entries)
    n = entries.shape[0]
    off = 1 if grid.has_zero else 0
    factor = np.zeros((n, n))
    jitter = 0.0
    if n > off:
        sub, jitter = cholesky_with_jitter(entries[off:, off:])
        factor[off:, off:] = sub
    factor.setflags(write=False)
    return CovarianceMatrix(entries, jitter, factor)


def conditional_variance(target: int, conditioners, cov: CovarianceMatrix) -> float:
    """``Var(X_target | X_c, c in conditioners)`` by Schur complement."""
    sigma = cov.entries
    cond = np.unique(np.asarray(list(conditioners), dtype=int))
    if target in set(cond.tolist()):
        raise ParameterError("target must not be among the conditioners")
    var = float(sigma[target, target])
    if cond.size == 0:
        return var
    # zero-variance conditioners carry no information
    cond = cond[np.diag(sigma)[cond] > 0]
    if cond.size == 0:
        return var
    scc = sigma[np.ix_(cond, cond)]
    sct = sigma[cond, target]
    try:
        lc, _ = cholesky_with_jitter(scc)
    except NotPositiveDefiniteError as exc:
        raise SingularConditionerError(str(exc)) from exc
    v = scipy.linalg.solve_triangular(lc, sct, lower=True, check_finite=False)
    # Schur complement of a PSD matrix; tiny negatives are rounding
    return max(var - float(v @ v), 0.0)
