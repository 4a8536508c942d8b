"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Both backends are
loaded side by side; outputs are compared before timing.
"""
import sys
import timeit

import numpy as np

from bifbm._kernels import _pykernels

try:
    from bifbm._kernels import _ckernels
except ImportError:
    sys.exit("compiled kernels are not built; install with pip install -e .")


def cases(rng):
    n = 4096
    t = np.sort(rng.uniform(0, 1, n))
    y = np.cumsum(rng.standard_normal(n)) / np.sqrt(n)
    levels = np.linspace(-1, 1, 201)
    w = np.full(n, 1.0 / n)
    g = np.linspace(0.01, 1, 600)
    return {
        "gram_bifbm (600 pts)": (lambda m: m.gram_bifbm(g, 0.6, 0.5)),
        "holder_sup (2048 pts)": (lambda m: m.holder_sup(t[::2].copy(), y[::2].copy(), 0.3)),
        "crossing_counts (4096 x 201)": (lambda m: m.crossing_counts(y, levels)),
        "weighted_hist (4096)": (lambda m: m.weighted_hist(y, w, -3.0, 0.01, 600)),
        "graph_box_count (4096)": (lambda m: m.graph_box_count(t, y, 2.0**-8)),
        "running_max_abs (4096)": (lambda m: m.running_max_abs(y)),
    }


def main():
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        a, b = fn(_pykernels), fn(_ckernels)
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        reps = 5
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=reps)) * 1e3
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=reps)) * 1e3
        print(f"{name:32s} {tp:10.3f} {tc:10.3f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
