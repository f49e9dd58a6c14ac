"""Binary snapshot format: layout and round trip."""

import struct

import numpy as np
import pytest

from amhd.grid import make_grid
from amhd.snapshot import read_snapshot, write_snapshot
from amhd.solver import InitialDataSpec, ModelParams, make_initial
from amhd.spectral import from_spectral


def make_state(model="MHD"):
    g = make_grid(16, 8, 2.0)
    params = ModelParams(model, nu=0.05, eta=0.02)
    state = make_initial(
        InitialDataSpec("random_band", amplitude=0.3, seed=9, bandwidth=2), g, params
    )
    state.t = 1.25
    return state


def test_header_layout(tmp_path):
    state = make_state("TCM")
    path = tmp_path / "snap.bin"
    write_snapshot(state, path)
    raw = path.read_bytes()
    magic, version, nx, ny, ly, t, tag = struct.unpack_from("<4sHIIddB", raw)
    assert magic == b"AMHD"
    assert version == 1
    assert (nx, ny) == (16, 8)
    assert ly == 2.0
    assert t == 1.25
    assert tag == 1  # TCM
    header_size = struct.calcsize("<4sHIIddB")
    assert len(raw) == header_size + 4 * 16 * 8 * 8
    # first field is u1, row-major little-endian f64
    u1 = np.frombuffer(raw, dtype="<f8", count=16 * 8, offset=header_size)
    assert np.allclose(u1.reshape(16, 8), from_spectral(state.u.x_comp), atol=1e-14)


def test_roundtrip(tmp_path):
    state = make_state("MHD")
    path = tmp_path / "snap.bin"
    write_snapshot(state, path)
    back = read_snapshot(path, nu=0.05, eta=0.02)
    assert back.t == state.t
    assert back.params.model == "MHD"
    assert back.grid == state.grid
    for a, b in (
        (state.u.x_comp, back.u.x_comp),
        (state.u.y_comp, back.u.y_comp),
        (state.w.x_comp, back.w.x_comp),
        (state.w.y_comp, back.w.y_comp),
    ):
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-14


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + b"\0" * 100)
    with pytest.raises(ValueError):
        read_snapshot(path)
