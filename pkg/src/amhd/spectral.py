"""Fourier fields on the periodic strip: transforms, derivatives, projection.

A scalar field is stored as a full complex coefficient array indexed
(n_x, n_y) in FFT order, normalized so coeffs[0, 0] equals the field
mean.  Fields are immutable values by convention: every operation here
is pure and returns fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec


@dataclass
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)


@dataclass
class VectorField:
    x_comp: SpectralField
    y_comp: SpectralField
    div_free: bool = False

    def __post_init__(self):
        if self.x_comp.grid != self.y_comp.grid:
            raise ValueError("vector components live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.x_comp.grid

    def copy(self) -> "VectorField":
        return VectorField(self.x_comp.copy(), self.y_comp.copy(), self.div_free)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.x_comp + other.x_comp, self.y_comp + other.y_comp)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.x_comp - other.x_comp, self.y_comp - other.y_comp)

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(self.x_comp * scalar, self.y_comp * scalar, self.div_free)

    __rmul__ = __mul__


def _check_same_grid(f: SpectralField, g: SpectralField) -> None:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.shape, dtype=complex))


def to_spectral(samples: np.ndarray, grid: GridSpec) -> SpectralField:
    """Forward transform of real node values, shape (Nx, Ny)."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.shape:
        raise ValueError(f"sample shape {samples.shape} does not match grid {grid.shape}")
    return SpectralField(grid, np.fft.fft2(samples, norm="forward"))


def from_spectral(f: SpectralField) -> np.ndarray:
    """Real node values of the field."""
    return np.fft.ifft2(f.coeffs, norm="forward").real


def derivative(f: SpectralField, axis: str, order: int = 1) -> SpectralField:
    """Spectral derivative: coefficient-wise multiplication by (i k_axis)^order.

    Odd orders zero the Nyquist mode of the differentiated axis so the
    result still represents a real field.
    """
    if order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    g = f.grid
    if axis == "x":
        mult = (1j * g.kx) ** order
        out = f.coeffs * mult
        if order % 2 == 1:
            out[g.Nx // 2, :] = 0.0
    elif axis == "y":
        mult = (1j * g.ky) ** order
        out = f.coeffs * mult
        if order % 2 == 1:
            out[:, g.Ny // 2] = 0.0
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return SpectralField(g, out)


def dealias(f: SpectralField) -> SpectralField:
    """Zero every mode with |n_x| > Nx/3 or |n_y| > Ny/3 (2/3 rule)."""
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask)


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased pointwise product, computed through physical space."""
    _check_same_grid(f, g)
    prod = from_spectral(f) * from_spectral(g)
    return dealias(to_spectral(prod, f.grid))


def divergence(w: VectorField) -> SpectralField:
    return derivative(w.x_comp, "x") + derivative(w.y_comp, "y")


def leray_project(w: VectorField) -> VectorField:
    """Divergence-free part of w: modal I - k k^T / |k|^2, identity at k = 0.

    Eliminates any pressure-gradient content; the mean (k = 0) momentum
    passes through untouched.
    """
    g = w.grid
    k2 = g.k2.copy()
    k2[0, 0] = 1.0  # guard; the k=0 mode is restored below
    wx, wy = w.x_comp.coeffs, w.y_comp.coeffs
    kdotw = (g.kx * wx + g.ky * wy) / k2
    px = wx - g.kx * kdotw
    py = wy - g.ky * kdotw
    px[0, 0] = wx[0, 0]
    py[0, 0] = wy[0, 0]
    return VectorField(SpectralField(g, px), SpectralField(g, py), div_free=True)


def integral(f: SpectralField) -> float:
    """Domain integral; the (0,0) coefficient times the domain area."""
    return float(f.coeffs[0, 0].real * f.grid.Lx * f.grid.Ly)


def l2_norm_sq(f: SpectralField) -> float:
    """Squared L2 norm over the domain, by Parseval."""
    return float(np.sum(np.abs(f.coeffs) ** 2) * f.grid.Lx * f.grid.Ly)


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(l2_norm_sq(f)))


def vector_l2_norm_sq(w: VectorField) -> float:
    return l2_norm_sq(w.x_comp) + l2_norm_sq(w.y_comp)


def max_abs(f: SpectralField) -> float:
    """Grid max of |f| in physical space."""
    return float(np.max(np.abs(from_spectral(f))))


def modal_divergence_residual(w: VectorField) -> float:
    """max |i k . w(k)| over modes, normalized by the largest modal magnitude."""
    g = w.grid
    div = g.kx * w.x_comp.coeffs + g.ky * w.y_comp.coeffs
    scale = max(
        float(np.max(np.abs(w.x_comp.coeffs))),
        float(np.max(np.abs(w.y_comp.coeffs))),
    )
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(div))) / scale
