"""Named verification checks behind the `verify` CLI verb.

Each check computes a residual and compares it against a fixed
tolerance.  The fault-injection hook replaces a named operation with a
sabotaged version so the table's failure path can be exercised end to
end (it must exit nonzero naming the broken operation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import decomposition, diagnostics, lp, spectral
from .grid import make_grid
from .solver import InitialDataSpec, ModelParams, make_initial, run
from .spectral import SpectralField, VectorField, to_spectral, zero_field

INJECTABLE = ("leray_project", "dealias")


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float
    passed: bool


def _random_field(grid, seed, band=None):
    rng = np.random.default_rng(seed)
    f = to_spectral(rng.standard_normal(grid.shape), grid)
    if band is not None:
        mask = (np.abs(grid.nx) <= band) & (np.abs(grid.ny) <= band)
        f = SpectralField(grid, f.coeffs * mask)
    return f


def _random_divfree(grid, seed, leray, band=6):
    v = VectorField(
        _random_field(grid, seed, band), _random_field(grid, seed + 7919, band)
    )
    out = leray(v)
    out.x_comp.coeffs[0, 0] = 0.0
    out.y_comp.coeffs[0, 0] = 0.0
    return out


def run_checks(level: str = "fast", inject_fault: str | None = None) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    if inject_fault is not None and inject_fault not in INJECTABLE:
        raise ValueError(f"unknown fault {inject_fault!r}; choose from {INJECTABLE}")

    leray = spectral.leray_project
    deal = spectral.dealias
    if inject_fault == "leray_project":
        leray = lambda w: w  # sabotaged: skips the projection entirely
    if inject_fault == "dealias":
        deal = lambda f: f

    full = level == "full"
    n_seeds = 50 if full else 5
    results: list[CheckResult] = []

    def check(name, residual, tol):
        residual = float(residual)
        results.append(CheckResult(name, residual, tol, residual <= tol))

    # -- spectral core -------------------------------------------------------
    g = make_grid(32, 32, 4.0)
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(g.shape)
    f = to_spectral(samples, g)
    back = spectral.from_spectral(f)
    check(
        "spectral_roundtrip",
        np.max(np.abs(back - samples)) / np.max(np.abs(samples)),
        1e-12,
    )
    check(
        "parseval",
        abs(np.sum(np.abs(f.coeffs) ** 2) - np.mean(samples**2)) / np.mean(samples**2),
        1e-12,
    )

    phi = _random_field(g, 1, band=9)
    phi.coeffs[0, 0] = 0.0
    grad = VectorField(spectral.derivative(phi, "x"), spectral.derivative(phi, "y"))
    proj_grad = leray(grad)
    scale = max(np.max(np.abs(grad.x_comp.coeffs)), np.max(np.abs(grad.y_comp.coeffs)))
    r1 = max(np.max(np.abs(proj_grad.x_comp.coeffs)), np.max(np.abs(proj_grad.y_comp.coeffs))) / scale
    w = VectorField(_random_field(g, 2), _random_field(g, 3))
    p = leray(w)
    pp = leray(p)
    pscale = max(np.max(np.abs(p.x_comp.coeffs)), np.max(np.abs(p.y_comp.coeffs)))
    r2 = max(
        np.max(np.abs(pp.x_comp.coeffs - p.x_comp.coeffs)),
        np.max(np.abs(pp.y_comp.coeffs - p.y_comp.coeffs)),
    ) / pscale
    r3 = spectral.modal_divergence_residual(p)
    check("leray_project", max(r1, r2, r3), 1e-12)

    g8 = make_grid(8, 8, 1.0)
    c = np.zeros(g8.shape, dtype=complex)
    c[3, 0] = c[-3, 0] = 0.5
    cut = np.max(np.abs(deal(SpectralField(g8, c)).coeffs))
    once = deal(f)
    idem = np.max(np.abs(deal(once).coeffs - once.coeffs))
    check("dealias", max(cut, idem), 1e-15)

    # -- anisotropic decomposition -------------------------------------------
    s = decomposition.split(f)
    check(
        "split_reconstruct",
        np.max(np.abs(s.reconstruct() - samples)) / np.max(np.abs(samples)),
        1e-12,
    )

    mode1 = to_spectral(np.cos(2 * np.pi * g.x) * np.ones_like(g.y), g)
    sharp = abs(decomposition.poincare_ratio(mode1) - decomposition.POINCARE_CONSTANT)
    excess = max(
        max(
            decomposition.poincare_ratio(_random_field(g, 100 + i))
            - decomposition.POINCARE_CONSTANT,
            0.0,
        )
        for i in range(n_seeds)
    )
    check("poincare_ratio", max(sharp, excess), 1e-12)

    agmon_excess = max(
        max(decomposition.agmon_ratio(_random_field(g, 200 + i)) - decomposition.AGMON_CONSTANT, 0.0)
        for i in range(max(n_seeds, 20))
    )
    check("agmon_ratio", agmon_excess, 1e-6)

    worst = 0.0
    for i in range(n_seeds):
        u = _random_divfree(g, 300 + i, leray)
        rep = decomposition.split_divergence_report(u)
        worst = max(
            worst,
            max(rep.max_bar_second, rep.max_dy_bar_second, rep.max_tilde_divergence)
            / max(rep.field_scale, 1e-300),
        )
        if not rep.input_divergence_free:
            worst = max(worst, 1.0)
    check("divfree_split", worst, 1e-12)

    # -- dyadic decomposition --------------------------------------------------
    shells = lp.get_shells(g)
    total = zero_field(g)
    blocks_sq = 0.0
    for q in range(-1, shells.q_max + 1):
        b = lp.dyadic_block(f, q)
        total = total + b
        blocks_sq += np.sum(np.abs(b.coeffs) ** 2)
    check(
        "lp_reconstruction",
        np.max(np.abs(total.coeffs - f.coeffs)) / np.max(np.abs(f.coeffs)),
        1e-12,
    )
    f_sq = np.sum(np.abs(f.coeffs) ** 2)
    check("lp_orthogonality", abs(blocks_sq - f_sq) / f_sq, 1e-12)

    window_excess = 0.0
    for s_exp in (1.0, 2.0):
        for i in range(3):
            ff = _random_field(g, 400 + i)
            ratio = (lp.besov_norm(ff, s_exp, 2, 2) / lp.sobolev_norm(ff, s_exp)) ** 2
            lo = 2.0 ** (-2 * s_exp - 2)
            hi = 2.0 ** (2 * s_exp + 2)
            window_excess = max(window_excess, lo - ratio, ratio - hi, 0.0)
    check("besov_sobolev_window", window_excess, 1e-12)

    bern_excess = 0.0
    ff = _random_field(g, 500)
    for order in (1, 2):
        for q in range(0, shells.q_max + 1):
            res = lp.bernstein_ratio(ff, q, order)
            if res.empty:
                continue
            bern_excess = max(
                bern_excess, 0.75**order - res.ratio, res.ratio - 1.5**order, 0.0
            )
    check("bernstein_bounds", bern_excess, 1e-12)

    fa, fb = _random_field(g, 600), _random_field(g, 601)
    t_ab, t_ba, rem = lp.bony_parts(fa, fb)
    total = t_ab + t_ba + rem
    expected = spectral.multiply(fa, fb)
    check(
        "bony_reconstruction",
        np.max(np.abs(total.coeffs - expected.coeffs)) / np.max(np.abs(expected.coeffs)),
        1e-10,
    )

    # -- structural zeros ------------------------------------------------------
    worst = 0.0
    ok = True
    for i in range(n_seeds):
        fv = _random_divfree(g, 700 + i, leray)
        gv = VectorField(_random_field(g, 800 + i, band=6), _random_field(g, 900 + i, band=6))
        hv = VectorField(_random_field(g, 1000 + i, band=6), _random_field(g, 1100 + i, band=6))
        report = diagnostics.vanishing_identity_suite(fv, gv, hv, q=2, k=2)
        worst = max(worst, report.max_residual)
        ok = ok and all(e.precondition_ok for e in report.entries.values())
    check("vanishing_identities", worst if ok else max(worst, 1.0), 1e-10)

    worst = max(
        diagnostics.tcm_cancellation_residual(
            _random_divfree(g, 1200 + i, leray), _random_divfree(g, 1300 + i, leray)
        )
        for i in range(n_seeds)
    )
    check("tcm_cancellation", worst, 1e-10)

    worst = 0.0
    for i in range(n_seeds):
        u = _random_divfree(g, 1400 + i, leray)
        ff2 = deal(_random_field(g, 1500 + i))
        adv = spectral.multiply(u.x_comp, spectral.derivative(ff2, "x")) + spectral.multiply(
            u.y_comp, spectral.derivative(ff2, "y")
        )
        val = abs(
            float(np.real(np.sum(np.conj(adv.coeffs) * ff2.coeffs))) * g.Lx * g.Ly
        )
        scale = spectral.l2_norm(adv) * spectral.l2_norm(ff2)
        worst = max(worst, val / scale if scale > 0 else val)
    check("transport_exchange", worst, 1e-10)

    # -- short solver runs -----------------------------------------------------
    if full:
        gg = make_grid(64, 64, 4.0)
        t_run, dt_run = 1.0, 1e-3
    else:
        gg = make_grid(32, 32, 4.0)
        t_run, dt_run = 0.2, 1e-3

    params = ModelParams("MHD", nu=0.1, eta=0.1)
    state = make_initial(
        InitialDataSpec("random_band", amplitude=1.0, seed=0, delta=1e-2), gg, params
    )
    result = run(state, T=t_run, dt=dt_run, record_every=1)
    check("energy_identity_run", diagnostics.energy_identity_residual(result.records).value, 1e-6)

    drift = 0.0
    for model in ("MHD", "TCM"):
        p0 = ModelParams(model, nu=0.0, eta=0.0)
        st = make_initial(
            InitialDataSpec("random_band", amplitude=1.0, seed=0, delta=1e-2), gg, p0
        )
        res = run(st, T=t_run, dt=dt_run, record_every=20)
        e0 = res.records[0].E
        drift = max(drift, max(abs(r.E - e0) for r in res.records) / e0)
    check("inviscid_drift", drift, 1e-8)

    g32 = make_grid(32, 32, 1.0)
    nu = 0.05
    p_lin = ModelParams("MHD", nu=nu, eta=0.0)
    st = make_initial(InitialDataSpec("single_mode", amplitude=1e-8), g32, p_lin)
    res = run(st, T=2.0, dt=2e-3, record_every=10)
    fit = diagnostics.fit_decay_rate(
        [(r.t, r.E_tilde) for r in res.records], window=(0.25, 2.0)
    )
    expected_rate = 2 * nu * (2 * math.pi) ** 2
    check("linear_decay_rate", abs(fit.rate / expected_rate - 1.0), 1e-2)

    return results


def format_table(results: list[CheckResult]) -> str:
    lines = [f"{'check':34s} {'residual':>12s} {'tol':>9s}  status"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:34s} {r.residual:12.3e} {r.tol:9.1e}  {status}")
    n_fail = sum(not r.passed for r in results)
    lines.append(
        f"{len(results) - n_fail}/{len(results)} checks passed"
        + (f"; FAILED: {', '.join(r.name for r in results if not r.passed)}" if n_fail else "")
    )
    return "\n".join(lines)
