"""Time integration of the two coupled systems on the strip.

Both models share the skeleton

    d_t u + u.grad u - nu d_xx u + grad p  = sigma w.grad w
    d_t w + u.grad w - eta d_xx w [+ grad Phi] = sigma w.grad u

with sigma = +1 for the magnetic coupling (w is the magnetic field) and
sigma = -1 for the tropical-climate coupling (w is the first baroclinic
mode, whose equation carries its own pressure-like gradient and is
therefore projected as well).  Dissipation acts only through d_xx and is
integrated exactly by a diagonal factor exp(-nu kx^2 dt); the advective
terms are advanced by classical four-stage Runge-Kutta on the
transformed variable.  All products are dealiased; states stay
divergence-free to round-off via re-projection at every stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec
from .spectral import (
    SpectralField,
    VectorField,
    dealias,
    derivative,
    max_abs,
    modal_divergence_residual,
    to_spectral,
)

MHD = "MHD"
TCM = "TCM"


class CFLError(RuntimeError):
    """Advective CFL violated; the step is refused, never clamped."""


class NumericsError(RuntimeError):
    """Non-finite values appeared during a run.

    Carries the diagnostics collected up to the last good step in
    ``records``.
    """

    def __init__(self, message: str, records=None):
        super().__init__(message)
        self.records = records if records is not None else []


@dataclass(frozen=True)
class ModelParams:
    model: str
    nu: float
    eta: float

    def __post_init__(self):
        if self.model not in (MHD, TCM):
            raise ValueError(f"model must be {MHD!r} or {TCM!r}, got {self.model!r}")
        for name, v in (("nu", self.nu), ("eta", self.eta)):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    @property
    def sigma(self) -> float:
        return 1.0 if self.model == MHD else -1.0

    @property
    def project_w(self) -> bool:
        return self.model == TCM


@dataclass
class SimState:
    u: VectorField
    w: VectorField
    t: float
    params: ModelParams
    grid: GridSpec


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str
    amplitude: float
    seed: int = 0
    mode: tuple[int, int] = (1, 0)
    bandwidth: int = 4
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("single_mode", "gaussian_packet", "random_band"):
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if self.delta is not None and self.delta > 0 and self.amplitude == 0:
            raise ValueError("degenerate spec: zero amplitude cannot meet a smallness target")
        if self.delta is not None and self.delta <= 0:
            raise ValueError(f"smallness target must be positive, got {self.delta}")


# ---------------------------------------------------------------------------
# stacked-array kernels: fields ordered [u1, u2, w1, w2]


def _stack(state: SimState) -> np.ndarray:
    return np.stack(
        [
            state.u.x_comp.coeffs,
            state.u.y_comp.coeffs,
            state.w.x_comp.coeffs,
            state.w.y_comp.coeffs,
        ]
    )


def _unstack(y: np.ndarray, grid: GridSpec) -> tuple[VectorField, VectorField]:
    u = VectorField(
        SpectralField(grid, y[0].copy()), SpectralField(grid, y[1].copy()), div_free=True
    )
    w = VectorField(
        SpectralField(grid, y[2].copy()), SpectralField(grid, y[3].copy()), div_free=True
    )
    return u, w


def _project_pairs(y: np.ndarray, grid: GridSpec, project_w: bool) -> np.ndarray:
    k2 = grid.k2.copy()
    k2[0, 0] = 1.0
    out = y.copy()
    pairs = ((0, 1), (2, 3)) if project_w else ((0, 1),)
    for ix, iy in pairs:
        mean_x, mean_y = y[ix, 0, 0], y[iy, 0, 0]
        kdot = (grid.kx * y[ix] + grid.ky * y[iy]) / k2
        out[ix] = y[ix] - grid.kx * kdot
        out[iy] = y[iy] - grid.ky * kdot
        out[ix, 0, 0], out[iy, 0, 0] = mean_x, mean_y
    return out


def _rhs(y: np.ndarray, grid: GridSpec, sigma: float, project_w: bool):
    """Dealiased advective right-hand side; returns (rhs, grid max speed).

    Dissipation is handled outside by the integrating factor.
    """
    kx, ky = grid.kx, grid.ky
    d1 = 1j * kx * y
    d1[:, grid.Nx // 2, :] = 0.0
    d2 = 1j * ky * y
    d2[:, :, grid.Ny // 2] = 0.0

    phys = np.fft.ifft2(np.concatenate([y, d1, d2]), norm="forward").real
    u1, u2, w1, w2 = phys[0:4]
    d1u1, d1u2, d1w1, d1w2 = phys[4:8]
    d2u1, d2u2, d2w1, d2w2 = phys[8:12]
    vmax = float(np.max(np.abs(phys[0:4])))

    adv = np.empty_like(phys[0:4])
    adv[0] = -(u1 * d1u1 + u2 * d2u1) + sigma * (w1 * d1w1 + w2 * d2w1)
    adv[1] = -(u1 * d1u2 + u2 * d2u2) + sigma * (w1 * d1w2 + w2 * d2w2)
    adv[2] = -(u1 * d1w1 + u2 * d2w1) + sigma * (w1 * d1u1 + w2 * d2u1)
    adv[3] = -(u1 * d1w2 + u2 * d2w2) + sigma * (w1 * d1u2 + w2 * d2u2)

    rhs = np.fft.fft2(adv, norm="forward") * grid.dealias_mask
    # pressure elimination for u always; for w only when the model carries
    # a gradient term in the w equation
    rhs = _project_pairs(rhs, grid, project_w=project_w)
    return rhs, vmax


def _half_step_factor(grid: GridSpec, params: ModelParams, dt: float) -> np.ndarray:
    eu = np.exp(-params.nu * grid.kx**2 * (dt / 2.0))
    ew = np.exp(-params.eta * grid.kx**2 * (dt / 2.0))
    ones = np.ones((1, grid.Ny))
    return np.stack([eu * ones, eu * ones, ew * ones, ew * ones])


def _step_arrays(
    y: np.ndarray, grid: GridSpec, params: ModelParams, dt: float, e_half: np.ndarray
) -> tuple[np.ndarray, float]:
    """One integrating-factor RK4 step on stacked coefficients."""
    sigma, pw = params.sigma, params.project_w
    e_full = e_half * e_half

    k1, vmax = _rhs(y, grid, sigma, pw)
    y2 = _project_pairs(e_half * (y + (dt / 2.0) * k1), grid, True)
    k2, _ = _rhs(y2, grid, sigma, pw)
    y3 = _project_pairs(e_half * y + (dt / 2.0) * k2, grid, True)
    k3, _ = _rhs(y3, grid, sigma, pw)
    y4 = _project_pairs(e_full * y + dt * e_half * k3, grid, True)
    k4, _ = _rhs(y4, grid, sigma, pw)

    y_next = e_full * y + (dt / 6.0) * (
        e_full * k1 + 2.0 * e_half * (k2 + k3) + k4
    )
    y_next = _project_pairs(y_next, grid, True) * grid.dealias_mask
    return y_next, vmax


def _check_cfl(vmax: float, dt: float, grid: GridSpec, c_cfl: float) -> None:
    if vmax <= 0.0:
        return
    dt_max = c_cfl * min(grid.dx, grid.dy) / vmax
    if dt > dt_max:
        raise CFLError(
            f"dt={dt:g} violates the advective CFL limit {dt_max:g} "
            f"(max speed {vmax:g}, C_cfl={c_cfl:g}); refusing to step"
        )


# ---------------------------------------------------------------------------
# public API


def nonlinear_rhs(state: SimState) -> tuple[VectorField, VectorField]:
    """Advective forcing with dissipation excluded.

    du = P(-u.grad u + sigma w.grad w); dw = -u.grad w + sigma w.grad u,
    additionally projected for the tropical-climate coupling where the w
    equation carries its own gradient term.
    """
    for name, v in (("u", state.u), ("w", state.w)):
        if modal_divergence_residual(v) > 1e-8:
            raise ValueError(f"state field {name} is not divergence-free")
    rhs, _ = _rhs(_stack(state), state.grid, state.params.sigma, state.params.project_w)
    du, dw = _unstack(rhs, state.grid)
    dw.div_free = state.params.project_w
    return du, dw


def step(state: SimState, dt: float, c_cfl: float = 0.5) -> SimState:
    """Advance one time step; refuses CFL-violating steps with a diagnostic."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    y = _stack(state)
    e_half = _half_step_factor(state.grid, state.params, dt)
    y_next, vmax = _step_arrays(y, state.grid, state.params, dt, e_half)
    _check_cfl(vmax, dt, state.grid, c_cfl)
    u, w = _unstack(y_next, state.grid)
    return SimState(u=u, w=w, t=state.t + dt, params=state.params, grid=state.grid)


@dataclass
class RunResult:
    records: list
    final_state: SimState
    snapshots: list = field(default_factory=list)


def run(
    state0: SimState,
    T: float,
    dt: float,
    record_every: int = 1,
    snapshot_every: int = 0,
    sobolev_s: tuple[float, ...] = (1.0, 2.0),
    c_cfl: float = 0.5,
) -> RunResult:
    """Integrate to time T, collecting diagnostics every record_every steps.

    The number of steps is round(T/dt); the run is deterministic for
    fixed inputs.  Snapshots (copies of the state) are kept every
    snapshot_every steps when that cadence is positive.  Non-finite
    values abort with the trajectory collected so far attached to the
    error.
    """
    from . import diagnostics

    if T < 0 or not math.isfinite(T):
        raise ValueError(f"T must be nonnegative and finite, got {T}")
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    if T == 0:
        return RunResult(records=[], final_state=state0, snapshots=[])

    n_steps = max(1, int(round(T / dt)))
    grid, params = state0.grid, state0.params
    e_half = _half_step_factor(grid, params, dt)

    ledger = diagnostics.LedgerAccumulator()
    records = []
    snapshots = []

    def materialize(y: np.ndarray, t: float) -> SimState:
        u, w = _unstack(y, grid)
        return SimState(u=u, w=w, t=t, params=params, grid=grid)

    y = _stack(state0)
    records.append(ledger.push(diagnostics.record(state0, sobolev_s=sobolev_s)))
    if snapshot_every > 0:
        snapshots.append(materialize(y, state0.t))

    for n in range(1, n_steps + 1):
        try:
            y, vmax = _step_arrays(y, grid, params, dt, e_half)
            _check_cfl(vmax, dt, grid, c_cfl)
        except CFLError as err:
            raise NumericsError(str(err), records=records) from err
        if not np.all(np.isfinite(y)):
            raise NumericsError(
                f"non-finite values at t={state0.t + n * dt:g}; aborting run",
                records=records,
            )
        t = state0.t + n * dt
        if n % record_every == 0 or n == n_steps:
            records.append(ledger.push(diagnostics.record(materialize(y, t), sobolev_s=sobolev_s)))
        if snapshot_every > 0 and (n % snapshot_every == 0 or n == n_steps):
            snapshots.append(materialize(y, t))

    diagnostics.refine_cumulative_integrals(records)
    return RunResult(records=records, final_state=materialize(y, state0.t + n_steps * dt), snapshots=snapshots)


# ---------------------------------------------------------------------------
# initial data


def _velocity_from_streamfunction(psi: SpectralField) -> VectorField:
    return VectorField(
        derivative(psi, "y"), -1.0 * derivative(psi, "x"), div_free=True
    )


def _normalize_max_speed(w: VectorField, amplitude: float) -> VectorField:
    peak = max(max_abs(w.x_comp), max_abs(w.y_comp))
    if peak == 0.0:
        return w
    return (amplitude / peak) * w


def _zero_vector(grid: GridSpec) -> VectorField:
    z = SpectralField(grid, np.zeros(grid.shape, dtype=complex))
    return VectorField(z, z.copy(), div_free=True)


def _single_mode_fields(init: InitialDataSpec, grid: GridSpec):
    mx, my = init.mode
    a = init.amplitude
    if mx == 0 and my == 0:
        raise ValueError("single_mode requires a nonzero mode index")
    if my == 0:
        samples = a * np.cos(2 * np.pi * mx * grid.x) * np.ones_like(grid.y)
        u = VectorField(
            SpectralField(grid, np.zeros(grid.shape, dtype=complex)),
            to_spectral(samples, grid),
            div_free=True,
        )
    elif mx == 0:
        samples = a * np.cos(2 * np.pi * my * grid.y / grid.Ly) * np.ones_like(grid.x)
        u = VectorField(
            to_spectral(samples, grid),
            SpectralField(grid, np.zeros(grid.shape, dtype=complex)),
            div_free=True,
        )
    else:
        kbar = 2 * np.pi * math.hypot(mx, my / grid.Ly)
        psi = to_spectral(
            (a / kbar)
            * np.cos(2 * np.pi * mx * grid.x)
            * np.cos(2 * np.pi * my * grid.y / grid.Ly),
            grid,
        )
        u = _velocity_from_streamfunction(psi)
    return u, _zero_vector(grid)


def _gaussian_packet_fields(init: InitialDataSpec, grid: GridSpec):
    # y-support concentrated in the middle half of the box: 6 sigma = Ly/2
    sigma_y = grid.Ly / 12.0
    envelope = np.exp(-((grid.y - grid.Ly / 2.0) ** 2) / (2.0 * sigma_y**2))
    psi_u = to_spectral(envelope * np.cos(2 * np.pi * grid.x), grid)
    psi_w = to_spectral(envelope * np.sin(2 * np.pi * grid.x), grid)
    u = _normalize_max_speed(_velocity_from_streamfunction(psi_u), init.amplitude)
    w = _normalize_max_speed(_velocity_from_streamfunction(psi_w), init.amplitude)
    return u, w


def _random_band_fields(init: InitialDataSpec, grid: GridSpec):
    rng = np.random.default_rng(init.seed)
    bw = init.bandwidth
    band = (np.abs(grid.nx) <= bw) & (np.abs(grid.ny) <= bw)
    shape_weight = np.exp(-2.0 * (grid.nx**2 + grid.ny**2) / max(bw, 1) ** 2)

    def one(seeded_rng):
        psi = to_spectral(seeded_rng.standard_normal(grid.shape), grid)
        coeffs = psi.coeffs * band * shape_weight
        coeffs[0, 0] = 0.0
        return _velocity_from_streamfunction(SpectralField(grid, coeffs))

    u = _normalize_max_speed(one(rng), init.amplitude)
    w = _normalize_max_speed(one(rng), init.amplitude)
    return u, w


def smallness(state: SimState) -> float:
    """||(u, w)||_L2^2 + ||d_y (u, w)||_L2^2, the smallness functional."""
    g = state.grid
    area = g.Lx * g.Ly
    total = 0.0
    for comp in (state.u.x_comp, state.u.y_comp, state.w.x_comp, state.w.y_comp):
        c2 = np.abs(comp.coeffs) ** 2
        total += area * float(np.sum(c2))
        total += area * float(np.sum(g.ky**2 * c2))
    return total


def make_initial(init: InitialDataSpec, grid: GridSpec, params: ModelParams) -> SimState:
    """Build a divergence-free state at t = 0, rescaled to the smallness
    target when one is given."""
    builders = {
        "single_mode": _single_mode_fields,
        "gaussian_packet": _gaussian_packet_fields,
        "random_band": _random_band_fields,
    }
    u, w = builders[init.kind](init, grid)
    u = VectorField(dealias(u.x_comp), dealias(u.y_comp), div_free=True)
    w = VectorField(dealias(w.x_comp), dealias(w.y_comp), div_free=True)
    state = SimState(u=u, w=w, t=0.0, params=params, grid=grid)

    if init.delta is not None:
        d0 = smallness(state)
        if d0 == 0.0:
            raise ValueError("degenerate spec: zero field cannot meet a smallness target")
        scale = math.sqrt(init.delta / d0)
        state = SimState(
            u=scale * u, w=scale * w, t=0.0, params=params, grid=grid
        )
    return state
