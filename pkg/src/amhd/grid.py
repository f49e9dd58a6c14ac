"""Discretization of the periodic strip [0,1) x [0,Ly)."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform Nx-by-Ny grid, periodic in both directions.

    The x-period is fixed to 1; the y-direction is a periodic truncation
    of the strip with period Ly.  Wavenumber tables are broadcastable
    against (Nx, Ny) coefficient arrays.
    """

    Nx: int
    Ny: int
    Ly: float
    Lx: float = 1.0

    @cached_property
    def nx(self) -> np.ndarray:
        """Integer x mode numbers in FFT order, shape (Nx, 1)."""
        return (np.fft.fftfreq(self.Nx) * self.Nx).reshape(self.Nx, 1)

    @cached_property
    def ny(self) -> np.ndarray:
        """Integer y mode numbers in FFT order, shape (1, Ny)."""
        return (np.fft.fftfreq(self.Ny) * self.Ny).reshape(1, self.Ny)

    @cached_property
    def kx(self) -> np.ndarray:
        return 2.0 * np.pi * self.nx / self.Lx

    @cached_property
    def ky(self) -> np.ndarray:
        return 2.0 * np.pi * self.ny / self.Ly

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule retention mask: keep |n_x| <= Nx/3 and |n_y| <= Ny/3."""
        return (np.abs(self.nx) <= self.Nx / 3.0) & (np.abs(self.ny) <= self.Ny / 3.0)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nx, self.Ny)

    @property
    def dx(self) -> float:
        return self.Lx / self.Nx

    @property
    def dy(self) -> float:
        return self.Ly / self.Ny

    @cached_property
    def x(self) -> np.ndarray:
        """Node coordinates in x, shape (Nx, 1)."""
        return (np.arange(self.Nx) * self.dx).reshape(self.Nx, 1)

    @cached_property
    def y(self) -> np.ndarray:
        """Node coordinates in y, shape (1, Ny)."""
        return (np.arange(self.Ny) * self.dy).reshape(1, self.Ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy


def make_grid(Nx: int, Ny: int, Ly: float) -> GridSpec:
    """Build a grid, rejecting sizes the spectral kernels cannot handle."""
    for name, n in (("Nx", Nx), ("Ny", Ny)):
        if n < 4:
            raise ValueError(f"{name} must be >= 4, got {n}")
        if n % 2 != 0:
            raise ValueError(f"{name} must be even, got {n}")
    if not Ly > 0:
        raise ValueError(f"Ly must be positive, got {Ly}")
    return GridSpec(Nx=int(Nx), Ny=int(Ny), Ly=float(Ly))
