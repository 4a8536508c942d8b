"""Deterministic per-stream standard normal generation.

Algorithm ``pcg64-seedseq-v1``: the stream for ``(seed, path_index,
component)`` is numpy's PCG64 bit generator seeded by
``SeedSequence(entropy=seed, spawn_key=(path_index, component))``, and
normals come from ``Generator.standard_normal`` (ziggurat). Each stream is
a pure function of its three integers, so results do not depend on the
order or number of workers that produce them.
"""
from __future__ import annotations

import numpy as np

from .errors import ParameterError

RNG_ALGORITHM = "pcg64-seedseq-v1"
SEED_MAX = 2**64 - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) <= SEED_MAX:
        raise ParameterError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


def stream(seed: int, path_index: int, component: int = 0) -> np.random.Generator:
    """Generator for one (path, component) stream."""
    ss = np.random.SeedSequence(
        entropy=check_seed(seed), spawn_key=(int(path_index), int(component))
    )
    return np.random.Generator(np.random.PCG64(ss))


def normals(seed: int, n: int, n_paths: int, component: int = 0, path_offset: int = 0):
    """``(n_paths, n)`` array; row ``j`` is the first ``n`` draws of stream
    ``(seed, path_offset + j, component)``."""
    out = np.empty((n_paths, n))
    for j in range(n_paths):
        out[j] = stream(seed, path_offset + j, component).standard_normal(n)
    return out
