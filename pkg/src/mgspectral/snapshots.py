"""MGSF snapshot files.

Layout (little-endian):

    bytes 0..3   magic "MGSF"
    bytes 4..5   version, u16 (currently 1)
    bytes 6..9   truncation radius N, u32
    then         (2N+1)^3 coefficients as float64 pairs (re, im), in
                 lexicographic (k1, k2, k3) order from -N to N

A JSON sidecar <name>.json carries grid, line, time and model parameters.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .fields import GridSpec, SpectralField

MAGIC = b"MGSF"
VERSION = 1


def write_mgsf(field: SpectralField, path, meta: dict | None = None):
    path = Path(path)
    N = field.grid.N
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", N))
        fh.write(np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes())
    sidecar = dict(meta or {})
    sidecar.setdefault("format", "MGSF")
    sidecar.setdefault("version", VERSION)
    sidecar["N"] = N
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_mgsf(path, pad: float = 1.5):
    """Returns (SpectralField, meta).  meta is {} if the sidecar is absent."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path} is not an MGSF file (magic {magic!r})")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != VERSION:
            raise ValueError(f"unsupported MGSF version {version}")
        (N,) = struct.unpack("<I", fh.read(4))
        n = 2 * N + 1
        data = np.frombuffer(fh.read(n ** 3 * 16), dtype="<c16")
        if data.size != n ** 3:
            raise ValueError(f"{path} truncated: expected {n ** 3} coefficients")
    coeffs = data.reshape((n, n, n)).astype(np.complex128)
    meta = {}
    sidecar = path.with_suffix(path.suffix + ".json")
    if sidecar.exists():
        with open(sidecar) as fh:
            meta = json.load(fh)
    grid = GridSpec(N=N, pad=pad)
    return SpectralField(grid=grid, coeffs=coeffs), meta
