"""Energy ledgers, decay fitting, structural-zero checks, and probes.

Every norm here is evaluated modally (Parseval).  Cumulative time
integrals of the dissipation rates are accumulated by trapezoid while a
run streams, then refined to fourth order (cubic Newton-Cotes) on
uniformly spaced records: the trapezoid error of the fast dissipation
transients would otherwise dominate the energy-identity residual.
Generic inequality constants are reported, never asserted: the asserted
tolerances all come from exactly computable quantities (closed-form
linear decay, structural zeros, conservation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .decomposition import bar_as_field, tilde_part
from .grid import GridSpec
from .lp import dyadic_block, get_shells, low_pass, sobolev_norm
from .spectral import (
    SpectralField,
    VectorField,
    dealias,
    derivative,
    from_spectral,
    l2_norm,
    l2_norm_sq,
    multiply,
    modal_divergence_residual,
)


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    E2: float
    D1: float
    D12: float
    E_tilde: float
    Hs: dict[float, float] = field(default_factory=dict)
    intD1: float = 0.0
    intD12: float = 0.0
    F: float = 0.0


class LedgerAccumulator:
    """Fills the cumulative entries of a record stream in arrival order.

    F(t) is the running sup of E plus the running sup of E2 plus the
    cumulative dissipation integrals; it is nondecreasing by
    construction.  Streaming accumulation is trapezoid; call
    refine_cumulative_integrals on the finished list for the
    fourth-order values.
    """

    def __init__(self):
        self._prev: DiagnosticsRecord | None = None
        self._sup_E = 0.0
        self._sup_E2 = 0.0
        self._intD1 = 0.0
        self._intD12 = 0.0

    def push(self, rec: DiagnosticsRecord) -> DiagnosticsRecord:
        if self._prev is not None:
            half_dt = 0.5 * (rec.t - self._prev.t)
            self._intD1 += half_dt * (self._prev.D1 + rec.D1)
            self._intD12 += half_dt * (self._prev.D12 + rec.D12)
        self._sup_E = max(self._sup_E, rec.E)
        self._sup_E2 = max(self._sup_E2, rec.E2)
        rec.intD1 = self._intD1
        rec.intD12 = self._intD12
        rec.F = self._sup_E + self._sup_E2 + self._intD1 + self._intD12
        self._prev = rec
        return rec


def cumulative_integral(t: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Cumulative integral of samples, fourth order on uniform spacing.

    Interior increments integrate the cubic through the four surrounding
    samples; the end intervals use the one-sided cubic.  Nonuniform or
    short series fall back to the trapezoid rule.
    """
    n = len(t)
    if n < 2:
        return np.zeros(n)
    h = np.diff(t)
    uniform = np.allclose(h, h[0], rtol=1e-9, atol=0.0)
    if not uniform or n < 4:
        inc = 0.5 * h * (f[:-1] + f[1:])
    else:
        hh = h[0]
        inc = np.empty(n - 1)
        inc[0] = hh / 24.0 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3])
        inc[-1] = hh / 24.0 * (f[-4] - 5 * f[-3] + 19 * f[-2] + 9 * f[-1])
        if n > 3:
            inc[1:-1] = hh / 24.0 * (-f[:-3] + 13 * f[1:-2] + 13 * f[2:-1] - f[3:])
    out = np.zeros(n)
    out[1:] = np.cumsum(inc)
    return out


def refine_cumulative_integrals(records: Sequence[DiagnosticsRecord]) -> None:
    """Rewrite intD1/intD12/F of a finished record list at fourth order."""
    if len(records) < 2:
        return
    t = np.array([r.t for r in records])
    int_d1 = cumulative_integral(t, np.array([r.D1 for r in records]))
    int_d12 = cumulative_integral(t, np.array([r.D12 for r in records]))
    sup_e = sup_e2 = 0.0
    for i, r in enumerate(records):
        sup_e = max(sup_e, r.E)
        sup_e2 = max(sup_e2, r.E2)
        r.intD1 = float(int_d1[i])
        r.intD12 = float(int_d12[i])
        r.F = sup_e + sup_e2 + r.intD1 + r.intD12


def record(state, sobolev_s: Sequence[float] = (1.0, 2.0)) -> DiagnosticsRecord:
    """Instantaneous energies and dissipation rates of a state."""
    g: GridSpec = state.grid
    area = g.Lx * g.Ly
    kx2, ky2 = g.kx**2, g.ky**2
    shells = get_shells(g)

    comps = [
        ("u", state.u.x_comp.coeffs),
        ("u", state.u.y_comp.coeffs),
        ("w", state.w.x_comp.coeffs),
        ("w", state.w.y_comp.coeffs),
    ]
    nu, eta = state.params.nu, state.params.eta

    E = E2 = D1 = D12 = E_tilde = 0.0
    hs_sq = {float(s): 0.0 for s in sobolev_s}
    for tag, c in comps:
        power = np.abs(c) ** 2
        visc = nu if tag == "u" else eta
        E += area * float(np.sum(power))
        E2 += area * float(np.sum(ky2 * power))
        D1 += visc * area * float(np.sum(kx2 * power))
        D12 += visc * area * float(np.sum(kx2 * ky2 * power))
        E_tilde += area * float(np.sum(power[1:, :]))
        for s in hs_sq:
            hs_sq[s] += area * float(np.sum((1.0 + shells.r**2) ** s * power))

    return DiagnosticsRecord(
        t=state.t,
        E=E,
        E2=E2,
        D1=D1,
        D12=D12,
        E_tilde=E_tilde,
        Hs={s: math.sqrt(v) for s, v in hs_sq.items()},
    )


class EnergyResidual(NamedTuple):
    value: float
    relative: bool


def energy_identity_residual(records: Sequence[DiagnosticsRecord]) -> EnergyResidual:
    """max over t of |E(t) + 2 int_0^t D1 - E(0)|, relative to E(0).

    Fewer than two records gives residual 0 by convention; E(0) = 0
    falls back to the absolute residual with the flag cleared.
    """
    if len(records) < 2:
        return EnergyResidual(0.0, True)
    e0 = records[0].E
    base = records[0].intD1
    worst = max(abs(r.E + 2.0 * (r.intD1 - base) - e0) for r in records)
    if e0 > 0:
        return EnergyResidual(worst / e0, True)
    return EnergyResidual(worst, False)


@dataclass
class FLedger:
    t: float
    sup_E: float
    sup_E2: float
    int_D1: float
    int_D12: float
    F: float


def f_functional(records: Sequence[DiagnosticsRecord]) -> list[FLedger]:
    """Recompute the boundedness ledger series from instantaneous entries."""
    t = np.array([r.t for r in records])
    int_d1 = cumulative_integral(t, np.array([r.D1 for r in records]))
    int_d12 = cumulative_integral(t, np.array([r.D12 for r in records]))
    out: list[FLedger] = []
    sup_e = sup_e2 = 0.0
    for i, r in enumerate(records):
        sup_e = max(sup_e, r.E)
        sup_e2 = max(sup_e2, r.E2)
        out.append(
            FLedger(
                t=r.t,
                sup_E=sup_e,
                sup_E2=sup_e2,
                int_D1=float(int_d1[i]),
                int_D12=float(int_d12[i]),
                F=sup_e + sup_e2 + float(int_d1[i]) + float(int_d12[i]),
            )
        )
    return out


class DecayFit(NamedTuple):
    rate: float
    residual: float


def fit_decay_rate(
    series: Iterable[tuple[float, float]], window: tuple[float, float]
) -> DecayFit:
    """Least-squares slope of log(value) against t inside the window.

    rate is minus the slope; residual is the RMS misfit of the log-linear
    model as a fraction of the total fitted log drop across the window
    (0 for exactly log-linear data).
    """
    t0, t1 = window
    pts = [(t, v) for t, v in series if t0 <= t <= t1]
    if len(pts) < 10:
        raise ValueError(f"need at least 10 samples in the window, got {len(pts)}")
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(v <= 0):
        raise ValueError("decay fit undefined: nonpositive values in the window")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    rms = float(np.sqrt(np.mean((logv - (slope * t + intercept)) ** 2)))
    span = float(t[-1] - t[0])
    drop = abs(slope) * span
    if rms <= 1e-13 * (1.0 + float(np.max(np.abs(logv)))):
        residual = 0.0  # log-linear to round-off
    elif drop > 0:
        residual = rms / drop
    else:
        residual = math.inf
    return DecayFit(rate=-float(slope), residual=residual)


# ---------------------------------------------------------------------------
# structural-zero suite


@dataclass
class IdentityResult:
    name: str
    value: float
    normalizer: float
    precondition_ok: bool = True

    @property
    def residual(self) -> float:
        if self.normalizer == 0.0:
            return abs(self.value)
        return abs(self.value) / self.normalizer


@dataclass
class VanishingReport:
    entries: dict[str, IdentityResult]

    @property
    def max_residual(self) -> float:
        return max((e.residual for e in self.entries.values()), default=0.0)

    def all_passed(self, tol: float = 1e-10) -> bool:
        return all(
            e.precondition_ok and e.residual <= tol for e in self.entries.values()
        )


def _quad3(a: SpectralField, b: SpectralField, c: SpectralField) -> tuple[float, float]:
    """Grid quadrature of a*b*c and the product of the factor L2 norms."""
    g = a.grid
    pa, pb, pc = from_spectral(a), from_spectral(b), from_spectral(c)
    value = float(np.mean(pa * pb * pc)) * g.Lx * g.Ly
    norm = l2_norm(a) * l2_norm(b) * l2_norm(c)
    return value, norm


def _quad3_vec(
    a: SpectralField, bs: Sequence[SpectralField], cs: Sequence[SpectralField]
) -> tuple[float, float]:
    """Quadrature of a * (b . c) for vector factors b, c."""
    g = a.grid
    pa = from_spectral(a)
    total = 0.0
    for b, c in zip(bs, cs):
        total += float(np.mean(pa * from_spectral(b) * from_spectral(c)))
    norm = (
        l2_norm(a)
        * math.sqrt(sum(l2_norm_sq(b) for b in bs))
        * math.sqrt(sum(l2_norm_sq(c) for c in cs))
    )
    return total * g.Lx * g.Ly, norm


def _inner(a: SpectralField, b: SpectralField) -> float:
    g = a.grid
    return float(np.real(np.sum(np.conj(a.coeffs) * b.coeffs))) * g.Lx * g.Ly


def _advect(f: VectorField, comp: SpectralField) -> SpectralField:
    """Dealiased f.grad applied to one scalar component."""
    return multiply(f.x_comp, derivative(comp, "x")) + multiply(
        f.y_comp, derivative(comp, "y")
    )


def vanishing_identity_suite(
    f: VectorField, g: VectorField, h: VectorField, q: int, k: int
) -> VanishingReport:
    """Discrete evaluation of the integrals that vanish identically.

    Five mechanisms are exercised: (a) a bar factor against the x
    derivative of an oscillation block, in three block arrangements;
    (b) oscillation-transport terms with all-average outer factors, in
    four arrangements including the block commutator; (c) a plain
    bar * d_x-tilde * bar triple; (d) transport of an oscillation field
    tested against itself; (e) the pairwise exchange cancellation.
    Each result is normalized by the product of its factor norms.
    Preconditions (divergence-free transport fields) are flagged per
    identity, never raised.
    """
    fd = VectorField(dealias(f.x_comp), dealias(f.y_comp))
    gd = VectorField(dealias(g.x_comp), dealias(g.y_comp))
    hd = VectorField(dealias(h.x_comp), dealias(h.y_comp))
    f_ok = modal_divergence_residual(fd) <= 1e-10

    f1_bar = bar_as_field(fd.x_comp)
    f2_tilde = tilde_part(fd.y_comp)
    g_tilde = [tilde_part(gd.x_comp), tilde_part(gd.y_comp)]
    g_bar = [bar_as_field(gd.x_comp), bar_as_field(gd.y_comp)]
    h_bar = [bar_as_field(hd.x_comp), bar_as_field(hd.y_comp)]

    entries: dict[str, IdentityResult] = {}

    def put(name, value, normalizer, ok=True):
        entries[name] = IdentityResult(name, value, normalizer, ok)

    # (a) low-pass bar / block arrangements of bar . d_x(tilde-block) . bar
    v, n = _quad3_vec(
        low_pass(f1_bar, k - 1),
        [derivative(dyadic_block(t, k), "x") for t in g_tilde],
        [dyadic_block(b, q) for b in h_bar],
    )
    put("bar_dx_block_low", v, n)
    v, n = _quad3_vec(
        dyadic_block(f1_bar, k),
        [derivative(low_pass(t, k - 1), "x") for t in g_tilde],
        [dyadic_block(b, q) for b in h_bar],
    )
    put("bar_dx_block_mid", v, n)
    v, n = _quad3_vec(
        dyadic_block(f1_bar, k),
        [derivative(dyadic_block(t, k), "x") for t in g_tilde],
        [dyadic_block(b, q) for b in h_bar],
    )
    put("bar_dx_block_high", v, n)

    # (b1) commutator of the block with oscillation transport, bar outer pair
    sf2 = low_pass(f2_tilde, k - 1)
    total = 0.0
    norms = 0.0
    for gb, hb in zip(g_bar, h_bar):
        dyg = derivative(dyadic_block(gb, k), "y")
        first = dyadic_block(multiply(sf2, dyg), q)
        second = multiply(sf2, dyadic_block(dyg, q))
        comm = first - second
        total += -_inner(comm, dyadic_block(hb, q))
        norms += l2_norm(comm) * l2_norm(dyadic_block(hb, q))
    put("commutator_bar_outer", total, norms)

    # (b2) low-pass difference against an all-bar transport pair
    sdiff = low_pass(f2_tilde, k - 1) - low_pass(f2_tilde, q)
    v, n = _quad3_vec(
        sdiff,
        [derivative(dyadic_block(dyadic_block(gb, k), q), "y") for gb in g_bar],
        [dyadic_block(hb, q) for hb in h_bar],
    )
    put("lowpass_diff_bar_outer", -v, n)

    # (b3) oscillation block against low-passed bar gradient
    v, n = _quad3_vec(
        dyadic_block(f2_tilde, k),
        [low_pass(derivative(gb, "y"), k - 1) for gb in g_bar],
        [dyadic_block(hb, q) for hb in h_bar],
    )
    put("block_bar_gradient_low", -v, n)

    # (b4) oscillation block against a bar gradient block
    v, n = _quad3_vec(
        dyadic_block(f2_tilde, k),
        [derivative(dyadic_block(gb, k), "y") for gb in g_bar],
        [dyadic_block(hb, q) for hb in h_bar],
    )
    put("block_bar_gradient_high", -v, n)

    # (c) bar factor times a pure d_x-tilde factor
    v, n = _quad3(
        derivative(f1_bar, "y"),
        derivative(g_tilde[0], "x"),
        derivative(g_bar[0], "y"),
    )
    put("bar_times_dx_tilde", -v, n)

    # (d) oscillation transport tested against itself (needs div-free f)
    for name, t in (("transport_self_g", g_tilde), ("transport_self_h",
                    [tilde_part(hd.x_comp), tilde_part(hd.y_comp)])):
        total = 0.0
        norms = 0.0
        for comp in t:
            adv = tilde_part(_advect(fd, comp))
            total += -_inner(adv, comp)
            norms += l2_norm(adv) * l2_norm(comp)
        put(name, total, norms, ok=f_ok)

    # (e) pairwise exchange between two transported oscillation fields
    h_tilde = [tilde_part(hd.x_comp), tilde_part(hd.y_comp)]
    total = 0.0
    norms = 0.0
    for gt, ht in zip(g_tilde, h_tilde):
        adv_g = tilde_part(_advect(fd, gt))
        adv_h = tilde_part(_advect(fd, ht))
        total += _inner(adv_g, ht) + _inner(adv_h, gt)
        norms += l2_norm(adv_g) * l2_norm(ht) + l2_norm(adv_h) * l2_norm(gt)
    put("transport_exchange", total, norms, ok=f_ok)

    return VanishingReport(entries=entries)


def tcm_cancellation_residual(u: VectorField, w: VectorField) -> float:
    """Residual of int w.grad(d_y w) . d_y u + int w.grad(d_y u) . d_y w,
    normalized by the term scales; zero for divergence-free w."""
    du = [derivative(u.x_comp, "y"), derivative(u.y_comp, "y")]
    dw = [derivative(w.x_comp, "y"), derivative(w.y_comp, "y")]
    total = 0.0
    scale = 0.0
    for du_i, dw_i in zip(du, dw):
        adv_dw = _advect(w, dw_i)
        adv_du = _advect(w, du_i)
        total += _inner(adv_dw, du_i) + _inner(adv_du, dw_i)
        scale += l2_norm(adv_dw) * l2_norm(du_i) + l2_norm(adv_du) * l2_norm(dw_i)
    if scale == 0.0:
        return abs(total)
    return abs(total) / scale


# ---------------------------------------------------------------------------
# commutator probe


@dataclass
class CommutatorProbe:
    lhs: float
    remainder: float
    rhs_terms: dict[str, float]
    ratio: float


def commutator_probe(
    f: VectorField, g: VectorField, h: VectorField, q: int, s: float
) -> CommutatorProbe:
    """Three-linear block estimate probe: reported, never asserted.

    lhs is -int Delta_q(f.grad g) . Delta_q h; the transport remainder
    -int S_q(tilde f^2) d_y Delta_q g . Delta_q h is computed exactly and
    subtracted; the norm products on the right-hand side are assembled
    with all generic constants set to 1.
    """
    fd = VectorField(dealias(f.x_comp), dealias(f.y_comp))
    gd = VectorField(dealias(g.x_comp), dealias(g.y_comp))
    hd = VectorField(dealias(h.x_comp), dealias(h.y_comp))

    g_comps = [gd.x_comp, gd.y_comp]
    h_comps = [hd.x_comp, hd.y_comp]

    lhs = 0.0
    for gc, hc in zip(g_comps, h_comps):
        lhs += -_inner(dyadic_block(_advect(fd, gc), q), dyadic_block(hc, q))

    sf2 = low_pass(tilde_part(fd.y_comp), q)
    remainder = 0.0
    for gc, hc in zip(g_comps, h_comps):
        remainder += -_inner(
            multiply(sf2, derivative(dyadic_block(gc, q), "y")), dyadic_block(hc, q)
        )

    def vec_l2(v: VectorField) -> float:
        return math.sqrt(l2_norm_sq(v.x_comp) + l2_norm_sq(v.y_comp))

    def vec_hs(v: VectorField, ss: float) -> float:
        return math.sqrt(sobolev_norm(v.x_comp, ss) ** 2 + sobolev_norm(v.y_comp, ss) ** 2)

    def dx(v: VectorField) -> VectorField:
        return VectorField(derivative(v.x_comp, "x"), derivative(v.y_comp, "x"))

    def dxy(v: VectorField) -> VectorField:
        return VectorField(
            derivative(derivative(v.x_comp, "x"), "y"),
            derivative(derivative(v.y_comp, "x"), "y"),
        )

    def dy(v: VectorField) -> VectorField:
        return VectorField(derivative(v.x_comp, "y"), derivative(v.y_comp, "y"))

    weight = 2.0 ** (-2 * q * s)
    hs_sq = vec_hs(fd, s) ** 2 + vec_hs(gd, s) ** 2 + vec_hs(hd, s) ** 2
    dx_hs_sq = (
        vec_hs(dx(fd), s) ** 2 + vec_hs(dx(gd), s) ** 2 + vec_hs(dx(hd), s) ** 2
    )
    low_factor = (
        vec_l2(dx(fd)) * vec_l2(dxy(fd))
        + vec_l2(fd) ** 2 * vec_l2(dx(fd)) ** 2
        + vec_l2(fd) ** 2 * vec_l2(dxy(fd)) ** 2
        + vec_l2(dx(gd)) * vec_l2(dxy(gd))
        + vec_l2(dxy(gd)) ** 2
    )
    mid_factor = math.sqrt(vec_l2(fd)) * math.sqrt(vec_l2(dy(fd))) + vec_l2(dy(gd))

    rhs_terms = {
        "low_norms_times_hs": weight * low_factor * hs_sq,
        "mixed_norms_times_dx_hs": weight * mid_factor * dx_hs_sq,
        "epsilon_dx_hs": weight * dx_hs_sq,
    }
    rhs_total = sum(rhs_terms.values())
    num = abs(lhs - remainder)
    if rhs_total == 0.0:
        ratio = 0.0 if num == 0.0 else math.inf
    else:
        ratio = num / rhs_total
    return CommutatorProbe(lhs=lhs, remainder=remainder, rhs_terms=rhs_terms, ratio=ratio)


# ---------------------------------------------------------------------------
# continuous dependence


def continuous_dependence(
    state0,
    eps_p: float,
    T: float,
    dt: float,
    seed: int = 0,
    check_every: int = 10,
    c_cfl: float = 0.5,
) -> float:
    """Growth factor of a small perturbation over [0, T].

    Runs the reference and a perturbed copy in lockstep and returns the
    max of the perturbation energy over its initial value.  A zero
    perturbation returns exactly 1.
    """
    from . import solver
    from .solver import InitialDataSpec, NumericsError, _half_step_factor, _stack, _step_arrays

    if eps_p == 0.0:
        return 1.0
    grid, params = state0.grid, state0.params
    pert_state = solver.make_initial(
        InitialDataSpec(kind="random_band", amplitude=1.0, seed=seed, bandwidth=4),
        grid,
        params,
    )
    pert = _stack(pert_state)
    pert_energy = float(np.sum(np.abs(pert) ** 2)) * grid.Lx * grid.Ly
    pert *= eps_p / math.sqrt(pert_energy)

    y_ref = _stack(state0)
    y_per = y_ref + pert

    def delta_energy(a, b):
        return float(np.sum(np.abs(a - b) ** 2)) * grid.Lx * grid.Ly

    e0 = delta_energy(y_ref, y_per)
    worst = 1.0
    n_steps = max(1, int(round(T / dt)))
    e_half = _half_step_factor(grid, params, dt)
    for n in range(1, n_steps + 1):
        y_ref, vmax_r = _step_arrays(y_ref, grid, params, dt, e_half)
        y_per, vmax_p = _step_arrays(y_per, grid, params, dt, e_half)
        solver._check_cfl(max(vmax_r, vmax_p), dt, grid, c_cfl)
        if not (np.all(np.isfinite(y_ref)) and np.all(np.isfinite(y_per))):
            raise NumericsError(f"perturbation run blew up at step {n}")
        if n % check_every == 0 or n == n_steps:
            worst = max(worst, delta_energy(y_ref, y_per) / e0)
    return worst


# ---------------------------------------------------------------------------
# CSV time series


def csv_header(sobolev_s: Sequence[float]) -> list[str]:
    return [
        "t", "E", "E2", "D1", "D12", "E_tilde", "intD1", "intD12", "F",
    ] + [f"Hs:{s:g}" for s in sobolev_s]


def write_csv(records: Sequence[DiagnosticsRecord], path, sobolev_s: Sequence[float]):
    """One row per record, full float64 round-trip precision."""
    lines = [",".join(csv_header(sobolev_s))]
    for r in records:
        row = [r.t, r.E, r.E2, r.D1, r.D12, r.E_tilde, r.intD1, r.intD12, r.F]
        row += [r.Hs[float(s)] for s in sobolev_s]
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}
