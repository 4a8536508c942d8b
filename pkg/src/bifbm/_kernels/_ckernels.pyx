# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; semantics identical to ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs, floor

cnp.import_array()


def gram_bifbm(const double[::1] t, double h, double k):
    cdef Py_ssize_t n = t.shape[0], i, j
    cdef double two_h = 2.0 * h, two_hk = 2.0 * h * k, c = pow(2.0, -k), v
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] g = out
    cdef double[::1] t2h = np.empty(n, dtype=np.float64)
    for i in range(n):
        t2h[i] = pow(t[i], two_h)
    for i in range(n):
        for j in range(i + 1):
            v = c * (pow(t2h[i] + t2h[j], k) - pow(fabs(t[i] - t[j]), two_hk))
            g[i, j] = v
            g[j, i] = v
    return out


def holder_sup(const double[::1] t, const double[::1] y, double alpha):
    cdef Py_ssize_t n = t.shape[0], i, j
    cdef double best = 0.0, dy, lower, p
    for i in range(n - 1):
        # dt^alpha grows with j, so the last evaluated power is a lower
        # bound for the current one and most pairs need no pow call
        lower = 0.0
        for j in range(i + 1, n):
            dy = fabs(y[j] - y[i])
            if dy <= best * lower:
                continue
            p = pow(t[j] - t[i], alpha)
            lower = p
            if dy > best * p:
                best = dy / p
    return best


cdef Py_ssize_t _left(const double[::1] a, double v) nogil:
    # first index with a[k] >= v
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if a[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef Py_ssize_t _right(const double[::1] a, double v) nogil:
    # first index with a[k] > v
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if a[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def crossing_counts(const double[::1] x, const double[::1] levels):
    cdef Py_ssize_t n = x.shape[0], m = levels.shape[0], i, a0, a1
    order = np.argsort(levels, kind="stable")
    cdef double[::1] srt = np.ascontiguousarray(np.asarray(levels)[order])
    diff_arr = np.zeros(m + 1, dtype=np.int64)
    cdef long long[::1] diff = diff_arr
    cdef double lo, hi
    # every level strictly between consecutive samples gets one crossing;
    # a sample starting a run of exact hits adds one to the levels it hits
    for i in range(n):
        if i == 0 or x[i - 1] != x[i]:
            a0 = _left(srt, x[i])
            a1 = _right(srt, x[i])
            diff[a0] += 1
            diff[a1] -= 1
        if i + 1 < n:
            lo = x[i] if x[i] < x[i + 1] else x[i + 1]
            hi = x[i] if x[i] > x[i + 1] else x[i + 1]
            a0 = _right(srt, lo)
            a1 = _left(srt, hi)
            if a0 < a1:
                diff[a0] += 1
                diff[a1] -= 1
    counts = np.cumsum(diff_arr[:m])
    out = np.zeros(m, dtype=np.int64)
    out[order] = counts
    return out


def weighted_hist(const double[::1] values, const double[::1] weights, double lo, double width,
                  Py_ssize_t nbins):
    cdef Py_ssize_t n = values.shape[0], i, b
    out = np.zeros(nbins, dtype=np.float64)
    cdef double[::1] h = out
    for i in range(n):
        b = <Py_ssize_t> floor((values[i] - lo) / width)
        if b < 0:
            b = 0
        elif b >= nbins:
            b = nbins - 1
        h[b] += weights[i]
    return out


def graph_box_count(const double[::1] t, const double[::1] y, double scale):
    cdef Py_ssize_t n = t.shape[0], i
    cdef long long total = 0, col, cur
    cdef double cmin, cmax, lo, hi
    if n == 1:
        return 1
    # columns are visited in increasing order because t is sorted
    cur = <long long> floor(t[0] / scale)
    cmin = y[0]
    cmax = y[0]
    for i in range(n - 1):
        lo = y[i] if y[i] < y[i + 1] else y[i + 1]
        hi = y[i] if y[i] > y[i + 1] else y[i + 1]
        col = <long long> floor(t[i] / scale)
        if col != cur:
            total += <long long> (floor(cmax / scale) - floor(cmin / scale) + 1)
            cur = col
            cmin = lo
            cmax = hi
        else:
            if lo < cmin:
                cmin = lo
            if hi > cmax:
                cmax = hi
        col = <long long> floor(t[i + 1] / scale)
        if col != cur:
            total += <long long> (floor(cmax / scale) - floor(cmin / scale) + 1)
            cur = col
            cmin = lo
            cmax = hi
    total += <long long> (floor(cmax / scale) - floor(cmin / scale) + 1)
    return total


def running_max_abs(const double[::1] y):
    cdef Py_ssize_t n = y.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] m = out
    cdef double cur = 0.0
    for i in range(n):
        if fabs(y[i]) > cur:
            cur = fabs(y[i])
        m[i] = cur
    return out
