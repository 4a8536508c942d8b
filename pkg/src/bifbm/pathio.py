"""Path serialisation: CSV and a little-endian binary block.

Binary layout, version 1 (all little-endian)::

    offset  size  field
    0       8     magic b"BIFBMPTH"
    8       2     version (u16) = 1
    10      8     n, grid length (u64)
    18      4     d, components (u32)
    22      1     method code (u8): 0 cholesky, 1 lamperti, 2 spectral
    23      8     seed (u64)
    31      8     h (f64)
    39      8     k (f64)
    47      ...   n rows of (1 + d) f64: t, component_1 .. component_d
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .covariance import BifBmParams, TimeGrid
from .errors import ParameterError
from .sampler import METHODS, SamplePath

MAGIC = b"BIFBMPTH"
VERSION = 1
_HEADER = struct.Struct("<8sHQIBQdd")


def write_csv(path: SamplePath, dest) -> Path:
    dest = Path(dest)
    header = ["t"] + [f"component_{c + 1}" for c in range(path.d)]
    with dest.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, row in zip(path.t, path.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])
    return dest


def read_csv(src, params: BifBmParams, method: str = "cholesky", seed: int = 0) -> SamplePath:
    data = np.loadtxt(src, delimiter=",", skiprows=1, ndmin=2)
    return SamplePath(TimeGrid(data[:, 0]), data[:, 1:], method, seed, params)


def to_bytes(path: SamplePath) -> bytes:
    head = _HEADER.pack(
        MAGIC,
        VERSION,
        len(path.grid),
        path.d,
        METHODS.index(path.method),
        path.seed,
        path.params.h,
        path.params.k,
    )
    rows = np.column_stack([path.t, path.values]).astype("<f8")
    return head + rows.tobytes(order="C")


def from_bytes(buf: bytes) -> SamplePath:
    if len(buf) < _HEADER.size:
        raise ParameterError("binary path block too short")
    magic, version, n, d, code, seed, h, k = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ParameterError("not a bifbm path block (bad magic)")
    if version != VERSION:
        raise ParameterError(f"unsupported path block version {version}")
    body = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    if body.size != n * (d + 1):
        raise ParameterError(f"payload has {body.size} values, expected {n * (d + 1)}")
    rows = body.reshape(n, d + 1).astype(float)
    return SamplePath(
        TimeGrid(rows[:, 0]), rows[:, 1:], METHODS[code], seed, BifBmParams(h, k, d)
    )


def write_binary(path: SamplePath, dest) -> Path:
    dest = Path(dest)
    dest.write_bytes(to_bytes(path))
    return dest


def read_binary(src) -> SamplePath:
    return from_bytes(Path(src).read_bytes())
