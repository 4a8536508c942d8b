"""Hot-loop kernels, compiled when available.

The Cython extension ``_ckernels`` is preferred. Set ``BIFBM_PURE_PYTHON=1``
to force the numpy fallback; ``BACKEND`` names the active implementation.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("BIFBM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def gram_bifbm(t, h, k):
    return _impl.gram_bifbm(_f64(t), float(h), float(k))


def holder_sup(t, y, alpha):
    return float(_impl.holder_sup(_f64(t), _f64(y), float(alpha)))


def crossing_counts(x, levels):
    return _impl.crossing_counts(_f64(x), _f64(np.atleast_1d(levels)))


def weighted_hist(values, weights, lo, width, nbins):
    return _impl.weighted_hist(_f64(values), _f64(weights), float(lo), float(width), int(nbins))


def graph_box_count(t, y, scale):
    return int(_impl.graph_box_count(_f64(t), _f64(y), float(scale)))


def running_max_abs(y):
    return _impl.running_max_abs(_f64(y))
