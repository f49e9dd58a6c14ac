"""Acceptance suite: one test per criterion, each printing a PASS/FAIL
line with the measured quantity and its pinned tolerance.

Run as `pytest tests/test_acceptance.py -v -s`.  The whole suite stays
well under the ten-minute budget; the two long runs (small-data decay
and continuous dependence) dominate.
"""

import math
import time

import numpy as np
import pytest

from amhd.grid import make_grid
from amhd.decomposition import (
    AGMON_CONSTANT,
    POINCARE_CONSTANT,
    agmon_ratio,
    poincare_ratio,
)
from amhd.diagnostics import (
    continuous_dependence,
    energy_identity_residual,
    fit_decay_rate,
    tcm_cancellation_residual,
    vanishing_identity_suite,
)
from amhd.lp import bernstein_ratio, besov_norm, dyadic_block, get_shells, sobolev_norm
from amhd.solver import (
    InitialDataSpec,
    ModelParams,
    SimState,
    make_initial,
    nonlinear_rhs,
    run,
    step,
)
from amhd.spectral import (
    SpectralField,
    VectorField,
    leray_project,
    to_spectral,
    zero_field,
)

TWO_PI_SQ = (2 * math.pi) ** 2


def report(num, name, passed, detail):
    print(f"\n[acceptance {num:02d}] {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"criterion {num} ({name}): {detail}"


def random_field(grid, seed, band=None):
    rng = np.random.default_rng(seed)
    f = to_spectral(rng.standard_normal(grid.shape), grid)
    if band is not None:
        mask = (np.abs(grid.nx) <= band) & (np.abs(grid.ny) <= band)
        f = SpectralField(grid, f.coeffs * mask)
    return f


def random_divfree(grid, seed, band=6):
    v = VectorField(random_field(grid, seed, band), random_field(grid, seed + 7919, band))
    out = leray_project(v)
    out.x_comp.coeffs[0, 0] = 0.0
    out.y_comp.coeffs[0, 0] = 0.0
    return out


@pytest.fixture(scope="module")
def smalldata_state():
    grid = make_grid(64, 64, 4.0)
    params = ModelParams("MHD", nu=0.1, eta=0.1)
    return make_initial(
        InitialDataSpec("random_band", amplitude=1.0, seed=7, delta=1e-4), grid, params
    )


@pytest.fixture(scope="module")
def smalldata_run(smalldata_state):
    return run(smalldata_state, T=20.0, dt=5e-3, record_every=2)


def test_criterion_01_energy_identity():
    grid = make_grid(64, 64, 4.0)
    params = ModelParams("MHD", nu=0.1, eta=0.1)
    state = make_initial(
        InitialDataSpec("random_band", amplitude=1.0, seed=7, delta=1e-2), grid, params
    )
    started = time.perf_counter()
    result = run(state, T=1.0, dt=1e-3, record_every=1)
    elapsed = time.perf_counter() - started
    res = energy_identity_residual(result.records)
    report(
        1,
        "energy identity",
        res.value <= 1e-6 and elapsed <= 60.0,
        f"residual={res.value:.3e} tol=1e-6, wall={elapsed:.1f}s limit=60s",
    )


def test_criterion_02_inviscid_conservation():
    grid = make_grid(64, 64, 4.0)
    drifts = {}
    for model in ("MHD", "TCM"):
        params = ModelParams(model, nu=0.0, eta=0.0)
        state = make_initial(
            InitialDataSpec("random_band", amplitude=1.0, seed=7, delta=1e-2),
            grid,
            params,
        )
        result = run(state, T=1.0, dt=1e-3, record_every=50)
        e0 = result.records[0].E
        drifts[model] = max(abs(r.E - e0) for r in result.records) / e0
    worst = max(drifts.values())
    report(
        2,
        "inviscid conservation",
        worst <= 1e-8,
        f"drift MHD={drifts['MHD']:.2e} TCM={drifts['TCM']:.2e} tol=1e-8",
    )


def test_criterion_03_linear_decay_rate():
    grid = make_grid(32, 32, 1.0)
    nu = 0.05
    params = ModelParams("MHD", nu=nu, eta=0.0)
    state = make_initial(InitialDataSpec("single_mode", amplitude=1e-8), grid, params)
    result = run(state, T=2.0, dt=2e-3, record_every=5)
    fit = fit_decay_rate(
        [(r.t, r.E_tilde) for r in result.records], window=(0.2, 2.0)
    )
    expected = 2 * nu * TWO_PI_SQ
    rel_err = abs(fit.rate / expected - 1.0)
    report(
        3,
        "linear oscillation decay rate",
        rel_err <= 0.01,
        f"rate={fit.rate:.5f} expected={expected:.5f} rel_err={rel_err:.2e} tol=1%",
    )


def test_criterion_04_nonlinear_oscillation_decay(smalldata_run):
    records = smalldata_run.records
    T = records[-1].t
    # guard the fit window against the double-precision floor
    floor = records[0].E_tilde * 1e-20
    above = [r for r in records if r.E_tilde >= floor]
    t_star = min(above[-1].t, T)
    window = (0.1 * T, t_star)

    vals = [r.E_tilde for r in records if window[0] <= r.t <= window[1]]
    monotone = all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))
    fit = fit_decay_rate([(r.t, r.E_tilde) for r in records], window=window)
    rate_floor = 0.5 * 2 * 0.1 * TWO_PI_SQ
    ok = monotone and fit.residual <= 0.05 and fit.rate >= rate_floor
    report(
        4,
        "nonlinear small-data oscillation decay",
        ok,
        f"monotone={monotone}, rate={fit.rate:.4f} >= {rate_floor:.4f}, "
        f"fit_residual={fit.residual:.2e} tol=0.05, window={window[0]:.1f}..{window[1]:.2f}",
    )


def test_criterion_05_smalldata_boundedness(smalldata_run):
    records = smalldata_run.records
    f_ratio = records[-1].F / records[0].F
    h2_0 = records[0].Hs[2.0]
    h2_ratio = max(r.Hs[2.0] for r in records) / h2_0
    ok = f_ratio <= 10.0 and h2_ratio <= 10.0
    report(
        5,
        "small-data boundedness",
        ok,
        f"F(T)/F(0)={f_ratio:.3f} tol=10, sup H2 / H2(0)={h2_ratio:.3f} tol=10",
    )


def test_criterion_06_vanishing_identities():
    grid = make_grid(32, 32, 4.0)
    worst = 0.0
    for seed in range(50):
        f = random_divfree(grid, seed)
        g = VectorField(
            random_field(grid, seed + 1000, band=6), random_field(grid, seed + 2000, band=6)
        )
        h = VectorField(
            random_field(grid, seed + 3000, band=6), random_field(grid, seed + 4000, band=6)
        )
        rep = vanishing_identity_suite(f, g, h, q=2, k=2)
        assert all(e.precondition_ok for e in rep.entries.values())
        worst = max(worst, rep.max_residual)
    report(
        6,
        "vanishing-identity suite (50 seeds, 32x32)",
        worst <= 1e-10,
        f"max residual={worst:.2e} tol=1e-10",
    )


def test_criterion_07_tcm_cancellation_and_sign():
    grid = make_grid(32, 32, 4.0)
    worst = max(
        tcm_cancellation_residual(
            random_divfree(grid, seed), random_divfree(grid, seed + 500)
        )
        for seed in range(50)
    )

    # hand-computed modal example: w = (sin 2pi y, sin 2pi x) gives
    # w.grad w = 2pi (sin2pix cos2piy, sin2piy cos2pix); du = +-P(that)
    g1 = make_grid(32, 32, 1.0)
    w = VectorField(
        to_spectral(np.sin(2 * np.pi * g1.y) * np.ones_like(g1.x), g1),
        to_spectral(np.sin(2 * np.pi * g1.x) * np.ones_like(g1.y), g1),
        div_free=True,
    )
    zero_u = VectorField(zero_field(g1), zero_field(g1), div_free=True)
    hand = leray_project(
        VectorField(
            to_spectral(2 * np.pi * np.sin(2 * np.pi * g1.x) * np.cos(2 * np.pi * g1.y), g1),
            to_spectral(2 * np.pi * np.sin(2 * np.pi * g1.y) * np.cos(2 * np.pi * g1.x), g1),
        )
    )
    sign_ok = True
    for model, sign in (("MHD", 1.0), ("TCM", -1.0)):
        params = ModelParams(model, nu=0.1, eta=0.1)
        du, _ = nonlinear_rhs(SimState(u=zero_u, w=w, t=0.0, params=params, grid=g1))
        err = max(
            np.max(np.abs(du.x_comp.coeffs - sign * hand.x_comp.coeffs)),
            np.max(np.abs(du.y_comp.coeffs - sign * hand.y_comp.coeffs)),
        )
        sign_ok = sign_ok and err < 1e-12
    report(
        7,
        "coupling cancellation and sign",
        worst <= 1e-10 and sign_ok,
        f"max exchange residual={worst:.2e} tol=1e-10, modal sign check={'ok' if sign_ok else 'bad'}",
    )


def test_criterion_08_littlewood_paley():
    grid = make_grid(64, 64, 4.0)
    shells = get_shells(grid)
    f = random_field(grid, seed=3)

    total = zero_field(grid)
    blocks_sq = 0.0
    for q in range(-1, shells.q_max + 1):
        b = dyadic_block(f, q)
        total = total + b
        blocks_sq += np.sum(np.abs(b.coeffs) ** 2)
    recon = np.max(np.abs(total.coeffs - f.coeffs)) / np.max(np.abs(f.coeffs))
    f_sq = np.sum(np.abs(f.coeffs) ** 2)
    ortho = abs(blocks_sq - f_sq) / f_sq

    window_ok = True
    for s in (1.0, 2.0):
        for seed in range(5):
            ff = random_field(grid, seed=100 + seed)
            ratio = (besov_norm(ff, s, 2, 2) / sobolev_norm(ff, s)) ** 2
            window_ok = window_ok and 2.0 ** (-2 * s - 2) <= ratio <= 2.0 ** (2 * s + 2)

    bern_ok = True
    for order in (1, 2):
        for q in range(0, shells.q_max + 1):
            res = bernstein_ratio(f, q, order)
            if res.empty:
                continue
            bern_ok = bern_ok and (0.75**order - 1e-12 <= res.ratio <= 1.5**order + 1e-12)
        # the ball block contains k = 0: only the upper bound applies
        low = bernstein_ratio(f, -1, order)
        bern_ok = bern_ok and low.ratio <= 1.5**order + 1e-12

    ok = recon <= 1e-12 and ortho <= 1e-12 and window_ok and bern_ok
    report(
        8,
        "dyadic decomposition",
        ok,
        f"reconstruction={recon:.2e}, orthogonality={ortho:.2e} tol=1e-12, "
        f"besov/sobolev window ok={window_ok}, bernstein bounds ok={bern_ok}",
    )


def test_criterion_09_anisotropic_inequalities():
    grid = make_grid(32, 32, 2.0)
    mode1 = to_spectral(np.cos(2 * np.pi * grid.x) * np.ones_like(grid.y), grid)
    equality_err = abs(poincare_ratio(mode1) - POINCARE_CONSTANT)
    poincare_excess = max(
        max(poincare_ratio(random_field(grid, s)) - POINCARE_CONSTANT, 0.0)
        for s in range(100)
    )
    agmon_worst = max(agmon_ratio(random_field(grid, s)) for s in range(100))
    ok = (
        equality_err <= 1e-12
        and poincare_excess <= 1e-12
        and agmon_worst <= AGMON_CONSTANT + 1e-6
    )
    report(
        9,
        "anisotropic inequalities",
        ok,
        f"poincare equality err={equality_err:.2e}, excess={poincare_excess:.2e} tol=1e-12, "
        f"max agmon={agmon_worst:.6f} tol=sqrt(2)+1e-6",
    )


def test_criterion_10_solver_order():
    grid = make_grid(32, 32, 2.0)
    params = ModelParams("MHD", nu=0.01, eta=0.01)
    state0 = make_initial(
        InitialDataSpec("random_band", amplitude=0.4, seed=11, bandwidth=3), grid, params
    )
    T = 0.5

    def final(dt):
        s = state0
        for _ in range(int(round(T / dt))):
            s = step(s, dt)
        return np.stack(
            [s.u.x_comp.coeffs, s.u.y_comp.coeffs, s.w.x_comp.coeffs, s.w.y_comp.coeffs]
        )

    y1, y2, y4 = final(0.01), final(0.005), final(0.0025)
    e12 = np.linalg.norm(y1 - y2)
    e24 = np.linalg.norm(y2 - y4)
    order = math.log2(e12 / e24)
    report(
        10,
        "time-stepper order",
        order >= 3.7,
        f"observed order={order:.3f} (errors {e12:.2e} -> {e24:.2e}), threshold=3.7",
    )


def test_criterion_11_continuous_dependence(smalldata_state):
    factor = continuous_dependence(smalldata_state, eps_p=1e-6, T=5.0, dt=5e-3, seed=3)
    report(
        11,
        "continuous dependence",
        factor <= 2.0,
        f"perturbation growth factor={factor:.6f} tol=2",
    )
