"""x-average / oscillation decomposition and anisotropic Lebesgue norms.

A field f on the strip splits into its average over the periodic x
variable, a 1D profile over y, and the zero-x-mean oscillation
remainder.  The sharp constants asserted here (1/(2 pi) for the x
Poincare ratio, sqrt(2) for the sup-interpolation ratio) follow from
the lowest retained x mode and the vanishing-point argument for
zero-mean periodic functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralField,
    VectorField,
    derivative,
    from_spectral,
)

POINCARE_CONSTANT = 1.0 / (2.0 * math.pi)
AGMON_CONSTANT = math.sqrt(2.0)


@dataclass
class SplitField:
    """x-average profile (1D over y) plus oscillation part (zero n_x=0 modes)."""

    bar: np.ndarray
    tilde: SpectralField

    def reconstruct(self) -> np.ndarray:
        """Physical samples of bar(y) + tilde(x, y)."""
        return self.bar[np.newaxis, :] + from_spectral(self.tilde)


def split(f: SpectralField) -> SplitField:
    bar = np.fft.ifft(f.coeffs[0, :], norm="forward").real
    tilde_coeffs = f.coeffs.copy()
    tilde_coeffs[0, :] = 0.0
    return SplitField(bar=bar, tilde=SpectralField(f.grid, tilde_coeffs))


def bar_as_field(f: SpectralField) -> SpectralField:
    """The x-average as a 2D field (only n_x = 0 modes populated)."""
    coeffs = np.zeros_like(f.coeffs)
    coeffs[0, :] = f.coeffs[0, :]
    return SpectralField(f.grid, coeffs)


def tilde_part(f: SpectralField) -> SpectralField:
    coeffs = f.coeffs.copy()
    coeffs[0, :] = 0.0
    return SpectralField(f.grid, coeffs)


def anisotropic_norm(f: SpectralField, p_x: float, q_y: float) -> float:
    """Inner L^p norm over x at each y node, then outer L^q norm over y.

    Only p, q in {2, inf} are supported; L^2 uses cell-weighted
    quadrature, L^inf the grid max.
    """
    g = f.grid
    phys = from_spectral(f)
    if p_x == 2:
        inner = np.sqrt(np.sum(phys**2, axis=0) * g.dx)
    elif p_x == math.inf:
        inner = np.max(np.abs(phys), axis=0)
    else:
        raise ValueError(f"unsupported inner exponent p_x={p_x}; use 2 or inf")
    if q_y == 2:
        return float(np.sqrt(np.sum(inner**2) * g.dy))
    if q_y == math.inf:
        return float(np.max(inner))
    raise ValueError(f"unsupported outer exponent q_y={q_y}; use 2 or inf")


def poincare_ratio(f: SpectralField) -> float:
    """||tilde f|| / ||d_x tilde f|| in L2, computed modally.

    The supremum over nonzero oscillation fields is 1/(2 pi), attained
    by the n_x = +-1 modes.  Returns 0 for a field with no oscillation
    part.
    """
    c = f.coeffs.copy()
    c[0, :] = 0.0
    num_sq = float(np.sum(np.abs(c) ** 2))
    if num_sq == 0.0:
        return 0.0
    den_sq = float(np.sum(np.abs(f.grid.kx * c) ** 2))
    return math.sqrt(num_sq / den_sq)


def agmon_ratio(f: SpectralField) -> float:
    """max over y of ||tf||_inf / (||tf||_2^1/2 ||d_x tf||_2^1/2), tf the
    oscillation of f restricted to that y row.

    Bounded by sqrt(2) up to grid tolerance: a zero-x-mean periodic
    function vanishes somewhere, so its squared sup is controlled by
    the integral of 2 |tf| |d_x tf|.
    """
    tilde = tilde_part(f)
    g = f.grid
    phys = from_spectral(tilde)
    dphys = from_spectral(derivative(tilde, "x"))
    sup = np.max(np.abs(phys), axis=0)
    l2 = np.sqrt(np.sum(phys**2, axis=0) * g.dx)
    dl2 = np.sqrt(np.sum(dphys**2, axis=0) * g.dx)
    scale = float(np.max(sup))
    if scale == 0.0:
        raise ValueError("agmon_ratio undefined for a field with zero oscillation part")
    # skip y rows where the oscillation is negligible relative to the field
    alive = (l2 > 1e-300) & (dl2 > 1e-14 * scale)
    if not np.any(alive):
        raise ValueError("agmon_ratio undefined: no resolvable oscillation rows")
    ratios = sup[alive] / np.sqrt(l2[alive] * dl2[alive])
    return float(np.max(ratios))


@dataclass
class SplitDivergenceReport:
    """Structure checks for the split of a divergence-free vector field.

    For div-free u with zero-mean second component, the x-average of the
    second component vanishes identically (so does its y derivative) and
    the oscillation part is itself divergence-free.
    """

    max_bar_second: float
    max_dy_bar_second: float
    max_tilde_divergence: float
    field_scale: float
    input_divergence_free: bool

    @property
    def passed(self) -> bool:
        tol = 1e-12 * self.field_scale
        return (
            self.input_divergence_free
            and self.max_bar_second <= tol
            and self.max_dy_bar_second <= tol
            and self.max_tilde_divergence <= tol
        )


def split_divergence_report(u: VectorField) -> SplitDivergenceReport:
    """Check the modal identities satisfied by the split of a div-free field.

    A violated precondition (input not divergence-free) is reported as a
    diagnostic failure, never raised.
    """
    g = u.grid
    ux, uy = u.x_comp.coeffs, u.y_comp.coeffs
    scale = max(float(np.max(np.abs(ux))), float(np.max(np.abs(uy))))
    if scale == 0.0:
        return SplitDivergenceReport(0.0, 0.0, 0.0, 0.0, True)

    div = g.kx * ux + g.ky * uy
    input_ok = float(np.max(np.abs(div))) <= 1e-10 * scale

    bar_second = uy[0, :]
    max_bar = float(np.max(np.abs(bar_second)))
    max_dy_bar = float(np.max(np.abs(g.ky[0, :] * bar_second)))

    div_tilde = div.copy()
    div_tilde[0, :] = 0.0
    max_div_tilde = float(np.max(np.abs(div_tilde)))

    return SplitDivergenceReport(
        max_bar_second=max_bar,
        max_dy_bar_second=max_dy_bar,
        max_tilde_divergence=max_div_tilde,
        field_scale=scale,
        input_divergence_free=input_ok,
    )
