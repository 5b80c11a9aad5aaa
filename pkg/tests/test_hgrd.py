import struct

import numpy as np
import pytest

from carnot_spectra.grid import Grid, random_bandlimited, sample
from carnot_spectra.hgrd import HGRDError, dumps, export_grid, import_grid, loads


@pytest.fixture
def f(h1):
    grid = Grid(4.0, np.pi, 8, 6)
    return sample(h1, grid, random_bandlimited(h1, 9, grid.T, real=False))


def test_round_trip_is_bit_exact(f, tmp_path):
    path = tmp_path / "f.hgrd"
    export_grid(f, path)
    back = import_grid(path)
    assert back.grid == f.grid and (back.ell, back.nc) == (1, 1)
    assert np.array_equal(back.data, f.data)
    assert path.read_bytes() == dumps(back)


def test_header_layout(f):
    buf = dumps(f)
    magic, version, ell, nc, Nz, Nt, L, T = struct.unpack_from("<4sHHHIIdd",
                                                              buf)
    assert (magic, version, ell, nc, Nz, Nt) == (b"HGRD", 1, 1, 1, 8, 6)
    assert (L, T) == (4.0, np.pi)
    assert len(buf) == 34 + 16 * 8 * 8 * 6
    re, im = struct.unpack_from("<dd", buf, 34)
    assert complex(re, im) == f.data[0, 0, 0]


def test_truncated_file(f):
    buf = dumps(f)
    with pytest.raises(HGRDError, match="size mismatch"):
        loads(buf[:-16])
    with pytest.raises(HGRDError, match="truncated header"):
        loads(buf[:10])


def test_unsupported_version_and_magic(f):
    buf = bytearray(dumps(f))
    buf[4:6] = struct.pack("<H", 2)
    with pytest.raises(HGRDError, match="version 2"):
        loads(bytes(buf))
    buf = bytearray(dumps(f))
    buf[:4] = b"XXXX"
    with pytest.raises(HGRDError, match="magic"):
        loads(bytes(buf))
