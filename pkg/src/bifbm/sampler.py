"""Sample paths of bi-fBm and bifractional Brownian sheets.

Three routes for one-parameter paths:

* ``cholesky``: exact on any grid, O(n^3) once per grid;
* ``lamperti``: exact (``toeplitz_exact``) or FFT-based (``circulant``)
  sampling of the stationary process ``Y(u) = e^{-HK u} B(e^u)`` on a
  geometric grid, mapped back by ``B(t) = t^HK Y(log t)``;
* ``spectral``: a finite cosine/sine sum over frequency cells of the
  spectral density of ``Y`` (approximate, with a reported bias bound).

Paths are generated in aligned blocks of ``PATH_BLOCK`` indices, so the
value of path ``j`` is the same whether it is produced alone, in a batch,
or by any number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import rng
from .covariance import (
    BifBmParams,
    SheetParams,
    TimeGrid,
    cholesky_with_jitter,
    cov_matrix,
    lamperti_cov,
)
from .errors import (
    CirculantEmbeddingError,
    GridError,
    ParameterError,
    TailMassError,
)
from .spectral import spectral_density_filon, tail_mass

__all__ = [
    "METHODS",
    "PATH_BLOCK",
    "SHEET_CAP",
    "SamplePath",
    "SampleField",
    "sample_cholesky",
    "sample_lamperti",
    "sample_spectral",
    "sample_sheet",
    "sample_paths",
    "cholesky_array",
    "lamperti_array",
    "spectral_array",
    "circulant_eigenvalues",
]

METHODS = ("cholesky", "lamperti", "spectral")
PATH_BLOCK = 64
SHEET_CAP = 2**16
# eigenvalues above -EIG_RTOL * max are rounding noise of the FFT
EIG_RTOL = 1e-12


@dataclass(frozen=True)
class SamplePath:
    """One realised path: ``values[i, c]`` is component ``c`` at ``grid[i]``."""

    grid: TimeGrid
    values: np.ndarray
    method: str
    seed: int
    params: BifBmParams
    path_index: int = 0
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape != (len(self.grid), self.params.d):
            raise ParameterError(
                f"values shape {v.shape} does not match grid {len(self.grid)} x d={self.params.d}"
            )
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}")
        object.__setattr__(self, "values", v)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def component(self, c: int = 0) -> np.ndarray:
        return self.values[:, c]


@dataclass(frozen=True)
class SampleField:
    """Sheet realisation on a product grid; ``values`` has shape ``(n_1, ..., n_N, d)``."""

    grids: tuple
    values: np.ndarray
    seed: int
    params: SheetParams
    field_index: int = 0

    @property
    def shape(self):
        return tuple(len(g) for g in self.grids)

    def points(self) -> np.ndarray:
        """``(n_1 ... n_N, N)`` array of grid points in C order."""
        mesh = np.meshgrid(*[g.points for g in self.grids], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BIFBM_THREADS", "1")))
    except ValueError:
        return 1


def _blocked(make_block: Callable[[int, int], np.ndarray], n_paths: int, path_offset: int):
    """Evaluate ``make_block(start, count)`` on aligned blocks and slice out
    rows ``path_offset .. path_offset + n_paths``."""
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    first = (path_offset // PATH_BLOCK) * PATH_BLOCK
    last = path_offset + n_paths
    starts = list(range(first, last, PATH_BLOCK))
    workers = min(_workers(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            blocks = list(ex.map(lambda s: make_block(s, PATH_BLOCK), starts))
    else:
        blocks = [make_block(s, PATH_BLOCK) for s in starts]
    out = np.concatenate(blocks, axis=0)
    return out[path_offset - first : path_offset - first + n_paths]


# ---------------------------------------------------------------- Cholesky

def cholesky_array(
    grid: TimeGrid,
    p: BifBmParams,
    n_paths: int,
    seed: int,
    component: int = 0,
    path_offset: int = 0,
    factor: Optional[np.ndarray] = None,
) -> np.ndarray:
    """``(n_paths, n)`` array of exact samples of one component."""
    if factor is None:
        factor = cov_matrix(grid, p).factor
    n = factor.shape[0]

    def block(start, count):
        xi = rng.normals(seed, n, count, component, start)
        return xi @ factor.T

    return _blocked(block, n_paths, path_offset)


def sample_cholesky(grid: TimeGrid, p: BifBmParams, n_paths: int, seed: int) -> list:
    """Exact paths ``L xi`` per component, with ``L`` the Cholesky factor."""
    seed = rng.check_seed(seed)
    cov = cov_matrix(grid, p)
    comps = [cholesky_array(grid, p, n_paths, seed, c, factor=cov.factor) for c in range(p.d)]
    info = {"jitter": cov.jitter_applied}
    return [
        SamplePath(grid, np.stack([c[j] for c in comps], axis=1), "cholesky", seed, p, j, info)
        for j in range(n_paths)
    ]


# ---------------------------------------------------------------- Lamperti

def _log_grid(grid: TimeGrid):
    pos = grid.positive
    if pos.size == 0:
        raise GridError("Lamperti sampling needs at least one positive grid point")
    step = grid.log_step()
    if step is None:
        raise GridError("Lamperti sampling needs geometrically spaced positive points")
    return pos, step


def circulant_eigenvalues(r: np.ndarray, m: int) -> np.ndarray:
    """Eigenvalues of the symmetric circulant whose first row embeds ``r``.

    ``r[j]`` is the covariance at lag ``j`` for ``j < m // 2 + 1``.
    """
    j = np.arange(m)
    row = r[np.minimum(j, m - j)]
    return np.fft.fft(row).real


def _embedding(p: BifBmParams, n: int, step: float, embed_factor: int, max_doublings: int):
    m = embed_factor * int(2 ** np.ceil(np.log2(max(2 * (n - 1), 2))))
    for _ in range(max_doublings + 1):
        # lags beyond the grid use the true covariance, not zero padding
        r = lamperti_cov(step * np.arange(m // 2 + 1), p)
        lam = circulant_eigenvalues(np.atleast_1d(r), m)
        floor = float(lam.min())
        if floor >= -EIG_RTOL * float(lam.max()):
            return m, np.clip(lam, 0.0, None), floor
        m *= 2
    raise CirculantEmbeddingError(
        f"circulant embedding not nonnegative: min eigenvalue {floor:.3e} at size {m // 2}",
        floor,
        m // 2,
    )


def lamperti_array(
    grid: TimeGrid,
    p: BifBmParams,
    n_paths: int,
    seed: int,
    mode: str = "circulant",
    component: int = 0,
    path_offset: int = 0,
    embed_factor: int = 1,
    max_doublings: int = 0,
):
    """``(array, info)`` for one component on a geometric grid (plus optional 0).

    ``info`` records the embedding size and its smallest eigenvalue in
    ``circulant`` mode, or the applied jitter in ``toeplitz_exact`` mode.
    """
    if mode not in ("toeplitz_exact", "circulant"):
        raise ParameterError(f"unknown Lamperti mode {mode!r}")
    pos, step = _log_grid(grid)
    n = pos.size
    scale = pos ** p.hk
    off = 1 if grid.has_zero else 0
    info = {"mode": mode, "log_step": step}

    if mode == "toeplitz_exact" or n == 1:
        idx = np.arange(n)
        toep = lamperti_cov(step * np.abs(idx[:, None] - idx[None, :]), p)
        toep = np.atleast_2d(toep)
        lf, jitter = cholesky_with_jitter(toep)
        info["jitter"] = jitter

        def ystat(start, count):
            return rng.normals(seed, n, count, component, start) @ lf.T

    else:
        m, lam, floor = _embedding(p, n, step, embed_factor, max_doublings)
        info.update(embed_size=m, min_eigenvalue=floor)
        # complex noise has E|w|^2 = 2, so Re(F(amp w)) has covariance C exactly
        amp = np.sqrt(lam / m)

        def ystat(start, count):
            xi = rng.normals(seed, 2 * m, count, component, start)
            w = xi[:, :m] + 1j * xi[:, m:]
            return np.fft.fft(amp * w, axis=1).real[:, :n]

    def block(start, count):
        out = np.zeros((count, n + off))
        out[:, off:] = ystat(start, count) * scale
        return out

    return _blocked(block, n_paths, path_offset), info


def sample_lamperti(
    grid: TimeGrid,
    p: BifBmParams,
    n_paths: int,
    seed: int,
    mode: str = "circulant",
    embed_factor: int = 1,
    max_doublings: int = 0,
) -> list:
    """Paths via the Lamperti transform on a geometric grid.

    A failed circulant embedding raises CirculantEmbeddingError carrying the
    eigenvalue floor; pass ``max_doublings > 0`` to retry with larger
    embeddings or switch to ``mode="toeplitz_exact"``.
    """
    seed = rng.check_seed(seed)
    comps, info = [], {}
    for c in range(p.d):
        arr, info = lamperti_array(
            grid, p, n_paths, seed, mode, c, 0, embed_factor, max_doublings
        )
        comps.append(arr)
    return [
        SamplePath(grid, np.stack([c[j] for c in comps], axis=1), "lamperti", seed, p, j, info)
        for j in range(n_paths)
    ]


# ---------------------------------------------------------------- spectral

def _spectral_modes(p, n_modes, lambda_max, density):
    if n_modes < 8:
        raise ParameterError("n_modes must be >= 8")
    if not lambda_max > 0:
        raise ParameterError("lambda_max must be positive")
    dlam = lambda_max / n_modes
    lams = (np.arange(n_modes) + 0.5) * dlam
    f = spectral_density_filon(lams, p) if density is None else np.asarray(
        [density(x) for x in lams], dtype=float
    )
    weights = np.sqrt(2.0 * np.clip(f, 0.0, None) * dlam)
    return lams, weights


def spectral_array(
    grid: TimeGrid,
    p: BifBmParams,
    n_modes: int,
    lambda_max: float,
    n_paths: int,
    seed: int,
    component: int = 0,
    path_offset: int = 0,
    density: Optional[Callable[[float], float]] = None,
) -> np.ndarray:
    """``(n_paths, n)`` array from the truncated spectral sum."""
    pos = grid.positive
    if pos.size == 0:
        raise GridError("spectral sampling needs positive grid points")
    off = 1 if grid.has_zero else 0
    lams, w = _spectral_modes(p, n_modes, lambda_max, density)
    phase = np.outer(np.log(pos), lams)
    cos_b = np.cos(phase) * w
    sin_b = np.sin(phase) * w
    scale = pos ** p.hk

    def block(start, count):
        xi = rng.normals(seed, 2 * n_modes, count, component, start)
        y = xi[:, :n_modes] @ cos_b.T + xi[:, n_modes:] @ sin_b.T
        out = np.zeros((count, pos.size + off))
        out[:, off:] = y * scale
        return out

    return _blocked(block, n_paths, path_offset)


def sample_spectral(
    grid: TimeGrid,
    p: BifBmParams,
    n_modes: int,
    lambda_max: float,
    n_paths: int,
    seed: int,
    tail_tol: float = 0.1,
    density: Optional[Callable[[float], float]] = None,
) -> list:
    """Approximate paths from ``n_modes`` frequency cells on ``[0, lambda_max]``.

    ``info`` carries the neglected spectral mass beyond ``lambda_max`` and
    the marginal-variance deficit ``1 - sum of cell weights`` of ``Y``;
    both bound the covariance bias. Raises TailMassError when the tail mass
    exceeds ``tail_tol``.
    """
    seed = rng.check_seed(seed)
    tm = 0.0 if density is not None else tail_mass(lambda_max, p)
    if tm > tail_tol:
        raise TailMassError(
            f"spectral mass beyond lambda_max={lambda_max:g} is {tm:.3g} > {tail_tol:g}"
        )
    _, w = _spectral_modes(p, n_modes, lambda_max, density)
    info = {
        "tail_mass": float(tm),
        "variance_deficit": float(1.0 - np.sum(w**2)),
        "n_modes": int(n_modes),
        "lambda_max": float(lambda_max),
    }
    comps = [
        spectral_array(grid, p, n_modes, lambda_max, n_paths, seed, c, density=density)
        for c in range(p.d)
    ]
    return [
        SamplePath(grid, np.stack([c[j] for c in comps], axis=1), "spectral", seed, p, j, info)
        for j in range(n_paths)
    ]


def sample_paths(method: str, grid: TimeGrid, p: BifBmParams, n_paths: int, seed: int, **kw):
    """Dispatch on ``method`` in ``METHODS``."""
    if method == "cholesky":
        return sample_cholesky(grid, p, n_paths, seed)
    if method == "lamperti":
        return sample_lamperti(grid, p, n_paths, seed, **kw)
    if method == "spectral":
        return sample_spectral(
            grid, p, kw.pop("n_modes", 2**12), kw.pop("lambda_max", 1e3), n_paths, seed, **kw
        )
    raise ParameterError(f"unknown method {method!r}; expected one of {METHODS}")


# ---------------------------------------------------------------- sheets

def sample_sheet(
    grids: Sequence[TimeGrid], p: SheetParams, n_fields: int, seed: int, cap: int = SHEET_CAP
) -> list:
    """Exact sheet samples on a product grid.

    The Gram matrix of component ``i`` is the Kronecker product of the
    per-axis Gram matrices, so its factor is the Kronecker product of the
    per-axis factors; it is applied one axis at a time.
    """
    seed = rng.check_seed(seed)
    grids = tuple(g if isinstance(g, TimeGrid) else TimeGrid(g) for g in grids)
    if len(grids) != p.n_params:
        raise ParameterError(f"need {p.n_params} axis grids, got {len(grids)}")
    shape = tuple(len(g) for g in grids)
    total = int(np.prod(shape))
    if total > cap:
        raise GridError(f"product grid has {total} points, above the cap {cap}")
    factors = [
        [cov_matrix(g, p.axis(i, j)).factor for j, g in enumerate(grids)] for i in range(p.d)
    ]
    out = np.empty((n_fields,) + shape + (p.d,))
    for i in range(p.d):
        for f in range(n_fields):
            x = rng.stream(seed, f, i).standard_normal(total).reshape(shape)
            for j, lf in enumerate(factors[i]):
                x = np.moveaxis(np.tensordot(lf, x, axes=([1], [j])), 0, j)
            out[f, ..., i] = x
    return [SampleField(grids, out[f], seed, p, f) for f in range(n_fields)]
