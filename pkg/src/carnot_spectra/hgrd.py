"""Reading and writing grid functions in the HGRD binary format.

Layout (little endian): magic ``b"HGRD"``, ``u16`` version (1), ``u16`` ell,
``u16`` nc, ``u32`` Nz, ``u32`` Nt, ``f64`` L, ``f64`` T, followed by the
samples in row-major order as ``(re, im)`` pairs of ``f64``.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .grid import Grid, GridFunction

MAGIC = b"HGRD"
VERSION = 1
_HEADER = struct.Struct("<4sHHHIIdd")


class HGRDError(ValueError):
    """Malformed or unsupported HGRD file."""


def dumps(f: GridFunction) -> bytes:
    g = f.grid
    head = _HEADER.pack(MAGIC, VERSION, f.ell, f.nc, g.Nz, g.Nt, g.L, g.T)
    return head + np.ascontiguousarray(f.data, dtype="<c16").tobytes()


def loads(buf: bytes) -> GridFunction:
    if len(buf) < _HEADER.size:
        raise HGRDError(f"truncated header: expected {_HEADER.size} bytes, "
                        f"got {len(buf)}")
    magic, version, ell, nc, Nz, Nt, L, T = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise HGRDError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise HGRDError(f"unsupported HGRD version {version} "
                        f"(this reader handles version {VERSION})")
    if ell < 1 or nc < 1:
        raise HGRDError(f"bad dimensions ell={ell}, nc={nc}")
    try:
        grid = Grid(L, T, Nz, Nt)
    except ValueError as exc:
        raise HGRDError(f"bad grid in header: {exc}") from None
    count = Nz ** (2 * ell) * Nt ** nc
    expected = _HEADER.size + 16 * count
    if len(buf) != expected:
        raise HGRDError(f"file size mismatch: expected {expected} bytes, "
                        f"got {len(buf)}")
    data = np.frombuffer(buf, dtype="<c16", count=count, offset=_HEADER.size)
    data = data.reshape((Nz,) * (2 * ell) + (Nt,) * nc)
    if not np.all(np.isfinite(data)):
        raise HGRDError("HGRD data contain non-finite samples")
    return GridFunction(grid, ell, nc, data.astype(complex))


def export_grid(f: GridFunction, path) -> None:
    """Write ``f`` to ``path`` (atomically via a temporary file)."""
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(dumps(f))
    os.replace(tmp, path)


def import_grid(path) -> GridFunction:
    with open(path, "rb") as fh:
        return loads(fh.read())
