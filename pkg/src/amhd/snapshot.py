"""Binary state snapshots, shared by every tool in the package.

Layout (little-endian): magic bytes "AMHD", format version u16, Nx and
Ny as u32, Ly and time as f64, model tag u8 (0 = MHD, 1 = TCM), then
four row-major f64 physical-space fields: u1, u2, w1, w2.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import make_grid
from .solver import MHD, TCM, ModelParams, SimState
from .spectral import VectorField, from_spectral, to_spectral

MAGIC = b"AMHD"
VERSION = 1
_HEADER = struct.Struct("<4sHIIddB")
_MODEL_TAGS = {MHD: 0, TCM: 1}
_TAG_MODELS = {v: k for k, v in _MODEL_TAGS.items()}


def write_snapshot(state: SimState, path) -> None:
    g = state.grid
    header = _HEADER.pack(
        MAGIC, VERSION, g.Nx, g.Ny, g.Ly, state.t, _MODEL_TAGS[state.params.model]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for comp in (state.u.x_comp, state.u.y_comp, state.w.x_comp, state.w.y_comp):
            fh.write(np.ascontiguousarray(from_spectral(comp), dtype="<f8").tobytes())


def read_snapshot(path, nu: float = 0.0, eta: float = 0.0) -> SimState:
    """Load a snapshot; dissipation coefficients are not stored in the
    format and must be supplied to obtain a steppable state."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ValueError(f"truncated snapshot header in {path}")
        magic, version, nx, ny, ly, t, tag = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        if version != VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        if tag not in _TAG_MODELS:
            raise ValueError(f"unknown model tag {tag}")
        grid = make_grid(nx, ny, ly)
        fields = []
        count = nx * ny
        for _ in range(4):
            data = np.frombuffer(fh.read(8 * count), dtype="<f8", count=count)
            fields.append(to_spectral(data.reshape(nx, ny), grid))
    params = ModelParams(model=_TAG_MODELS[tag], nu=nu, eta=eta)
    return SimState(
        u=VectorField(fields[0], fields[1], div_free=True),
        w=VectorField(fields[2], fields[3], div_free=True),
        t=t,
        params=params,
        grid=grid,
    )
