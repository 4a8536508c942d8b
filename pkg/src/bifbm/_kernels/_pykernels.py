"""Pure-numpy implementations of the hot loops.

Used when the compiled extension is unavailable or when
``BIFBM_PURE_PYTHON=1``. Results match the compiled versions to rounding.
"""
import numpy as np


def gram_bifbm(t, h, k):
    t = np.ascontiguousarray(t, dtype=np.float64)
    t2h = t ** (2 * h)
    s, u = np.meshgrid(t, t, indexing="ij")
    a = np.add.outer(t2h, t2h) ** k
    return 2.0 ** (-k) * (a - np.abs(s - u) ** (2 * h * k))


def holder_sup(t, y, alpha):
    t = np.ascontiguousarray(t, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = t.size
    best = 0.0
    for i in range(n - 1):
        dy = np.abs(y[i + 1:] - y[i])
        dt = (t[i + 1:] - t[i]) ** alpha
        m = float(np.max(dy / dt))
        if m > best:
            best = m
    return best


def crossing_counts(x, levels):
    """Crossings of each level by the sequence ``x``.

    A strict sign change of ``x - u`` between consecutive samples counts one;
    every maximal run of exact hits ``x == u`` counts one.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    levels = np.ascontiguousarray(levels, dtype=np.float64)
    out = np.zeros(levels.size, dtype=np.int64)
    if x.size == 0:
        return out
    a, b = x[:-1], x[1:]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    # strict crossings: lo < u < hi
    for j, u in enumerate(levels):
        strict = np.count_nonzero((lo < u) & (u < hi))
        hit = x == u
        runs = np.count_nonzero(hit[1:] & ~hit[:-1]) + int(hit[0])
        out[j] = strict + runs
    return out


def weighted_hist(values, weights, lo, width, nbins):
    values = np.ascontiguousarray(values, dtype=np.float64)
    idx = np.floor((values - lo) / width).astype(np.int64)
    idx = np.clip(idx, 0, nbins - 1)
    return np.bincount(idx, weights=weights, minlength=nbins).astype(np.float64)


def graph_box_count(t, y, scale):
    """Boxes of side ``scale`` met by the piecewise-linear graph of (t, y).

    Columns are ``[c s, (c + 1) s)`` in time; inside a column the graph covers
    the vertical range of its samples plus the segments entering it.
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    col = np.floor(t / scale).astype(np.int64)
    # segment between consecutive samples contributes to both end columns
    ylo = np.minimum(y[:-1], y[1:])
    yhi = np.maximum(y[:-1], y[1:])
    cols = np.concatenate([col[:-1], col[1:]])
    lo = np.concatenate([ylo, ylo])
    hi = np.concatenate([yhi, yhi])
    if t.size == 1:
        cols, lo, hi = col, y, y
    order = np.argsort(cols, kind="stable")
    cols, lo, hi = cols[order], lo[order], hi[order]
    starts = np.flatnonzero(np.r_[True, cols[1:] != cols[:-1]])
    cmin = np.minimum.reduceat(lo, starts)
    cmax = np.maximum.reduceat(hi, starts)
    return int(np.sum(np.floor(cmax / scale) - np.floor(cmin / scale) + 1))


def running_max_abs(y):
    return np.maximum.accumulate(np.abs(np.asarray(y, dtype=np.float64)))
