"""Command-line front end: run, verify, sweep, fit.

Exit codes: run returns 1 on validation failure and 2 on numerical
abort (CFL refusal or non-finite values); verify returns 3 when any
check fails; sweep returns 2 unless every run succeeds; fit returns 1
on missing columns or unusable windows.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, diagnostics
from .runcfg import ConfigError, RunConfig, load_config
from .snapshot import write_snapshot
from .solver import CFLError, NumericsError, make_initial, run, smallness
from .verify import format_table, run_checks, INJECTABLE


def _fit_oscillation_rate(records, T: float):
    """Decay rate of the oscillation energy over the post-transient window."""
    series = [(r.t, r.E_tilde) for r in records]
    try:
        fit = diagnostics.fit_decay_rate(series, window=(0.1 * T, T))
        return fit.rate, fit.residual
    except ValueError:
        return math.nan, math.nan


def _write_meta(path: Path, cfg: RunConfig, extra: dict) -> None:
    lines = [cfg.as_text().rstrip()]
    for key, value in extra.items():
        lines.append(f"{key} = {value}")
    path.write_text("\n".join(lines) + "\n")


def _execute_run(cfg: RunConfig, outdir: Path) -> dict:
    """Shared run body: writes diagnostics.csv, run.meta, snapshots, figure."""
    from .plots import render_run_figure

    outdir.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid()
    params = cfg.params()
    state = make_initial(cfg.initial_spec(), grid, params)
    delta0 = smallness(state)

    started = time.perf_counter()
    status = "ok"
    try:
        result = run(
            state,
            T=cfg.T,
            dt=cfg.dt,
            record_every=cfg.record_every,
            snapshot_every=cfg.snapshot_every,
            sobolev_s=cfg.sobolev_s,
            c_cfl=cfg.cfl,
        )
        records = result.records
    except NumericsError as err:
        status = f"aborted: {err}"
        records = err.records
        result = None
    wall = time.perf_counter() - started

    diagnostics.write_csv(records, outdir / "diagnostics.csv", cfg.sobolev_s)
    if records:
        render_run_figure(records, outdir / "diagnostics.png")
    if result is not None:
        for i, snap in enumerate(result.snapshots):
            write_snapshot(snap, outdir / f"snapshot_{i:06d}.bin")

    rate, fit_res = (math.nan, math.nan)
    f_ratio = math.nan
    if records and status == "ok":
        rate, fit_res = _fit_oscillation_rate(records, cfg.T)
        if records[0].F > 0:
            f_ratio = records[-1].F / records[0].F

    _write_meta(
        outdir / "run.meta",
        cfg,
        {
            "version": __version__,
            "delta0": repr(delta0),
            "wall_time_s": f"{wall:.3f}",
            "n_records": len(records),
            "status": status,
            "rng": f"numpy-default-rng(seed={cfg.seed})",
        },
    )
    if status != "ok":
        raise NumericsError(status, records=records)
    return {
        "final_E": records[-1].E if records else math.nan,
        "final_E_tilde": records[-1].E_tilde if records else math.nan,
        "fitted_rate": rate,
        "fit_residual": fit_res,
        "F_ratio": f_ratio,
    }


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.outdir:
            cfg.outdir = args.outdir
        cfg.validate()
    except (ConfigError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    try:
        summary = _execute_run(cfg, Path(cfg.outdir))
    except (NumericsError, CFLError) as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return 2
    print(
        f"run complete: E={summary['final_E']:.6e} "
        f"E_tilde={summary['final_E_tilde']:.6e} -> {cfg.outdir}"
    )
    return 0


def cmd_verify(args) -> int:
    try:
        results = run_checks(level=args.level, inject_fault=args.inject_fault)
    except ValueError as err:
        print(f"verify error: {err}", file=sys.stderr)
        return 1
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 3


def _sweep_worker(cfg: RunConfig, axis: str, value: float, outroot: str) -> dict:
    sub = cfg.with_value(axis, value)
    subdir = Path(outroot) / f"{axis}_{value:g}"
    row = {"value": value, "final_E": math.nan, "final_E_tilde": math.nan,
           "fitted_rate": math.nan, "F_ratio": math.nan, "status": "ok"}
    try:
        sub.validate()
        summary = _execute_run(sub, subdir)
        row.update(
            final_E=summary["final_E"],
            final_E_tilde=summary["final_E_tilde"],
            fitted_rate=summary["fitted_rate"],
            F_ratio=summary["F_ratio"],
        )
    except (ConfigError, NumericsError, CFLError) as err:
        row["status"] = f"failed: {err}"
    return row


def cmd_sweep(args) -> int:
    from .plots import render_sweep_figure

    try:
        cfg = load_config(args.config)
        cfg.validate()
        values = [float(x) for x in args.values.split(",") if x.strip()]
        if not values:
            raise ConfigError("values", "empty sweep list")
        cfg.with_value(args.axis, values[0])  # axis validity
    except (ConfigError, OSError, ValueError) as err:
        print(f"sweep error: {err}", file=sys.stderr)
        return 1

    outroot = Path(args.outdir) if args.outdir else Path(cfg.outdir)
    outroot.mkdir(parents=True, exist_ok=True)
    workers = int(os.environ.get("AMHD_WORKERS", "0")) or min(
        len(values), os.cpu_count() or 1
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(
                    _sweep_worker,
                    [cfg] * len(values),
                    [args.axis] * len(values),
                    values,
                    [str(outroot)] * len(values),
                )
            )
    else:
        rows = [_sweep_worker(cfg, args.axis, v, str(outroot)) for v in values]

    header = "value,final_E,final_E_tilde,fitted_rate,F_ratio,status"
    lines = [header]
    for row in rows:
        lines.append(
            ",".join(
                [repr(float(row["value"])), repr(float(row["final_E"])),
                 repr(float(row["final_E_tilde"])), repr(float(row["fitted_rate"])),
                 repr(float(row["F_ratio"])), row["status"].replace(",", ";")]
            )
        )
    (outroot / "sweep_summary.csv").write_text("\n".join(lines) + "\n")
    render_sweep_figure(args.axis, rows, outroot / "sweep_summary.png")

    failures = [r for r in rows if r["status"] != "ok"]
    for r in failures:
        print(f"{args.axis}={r['value']:g}: {r['status']}", file=sys.stderr)
    return 0 if not failures else 2


def cmd_fit(args) -> int:
    try:
        cols = diagnostics.read_csv(args.csv)
    except OSError as err:
        print(f"fit error: {err}", file=sys.stderr)
        return 1
    if args.column not in cols:
        print(
            f"fit error: column {args.column!r} not in {list(cols)}", file=sys.stderr
        )
        return 1
    try:
        t0, _, t1 = args.window.partition(":")
        window = (float(t0), float(t1))
    except ValueError:
        print(f"fit error: window must be t0:t1, got {args.window!r}", file=sys.stderr)
        return 1
    series = list(zip(cols["t"], cols[args.column]))
    try:
        fit = diagnostics.fit_decay_rate(series, window=window)
    except ValueError as err:
        print(f"fit error: {err}", file=sys.stderr)
        return 1
    print(f"rate = {fit.rate:.12g}")
    print(f"residual = {fit.residual:.12g}")
    if args.plot:
        from .plots import render_fit_figure

        render_fit_figure(cols["t"], cols[args.column], fit.rate, window, args.plot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amhd",
        description="Pseudo-spectral lab for 2D MHD / tropical-climate systems "
        "with horizontal-only dissipation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation from a key=value config")
    p.add_argument("config", help="path to the configuration file")
    p.add_argument("--outdir", help="override the output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run the named verification checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument(
        "--inject-fault",
        choices=INJECTABLE,
        help="testing hook: sabotage a named operation to prove failures are caught",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run one config across an axis of values")
    p.add_argument("config")
    p.add_argument("--axis", required=True, help="numeric config field to vary")
    p.add_argument("--values", required=True, help="comma-separated list of values")
    p.add_argument("--outdir", help="sweep output root (default: config outdir)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit an exponential decay rate to a CSV column")
    p.add_argument("csv")
    p.add_argument("--column", required=True)
    p.add_argument("--window", required=True, help="fit window as t0:t1")
    p.add_argument("--plot", help="optional path for a fit figure")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
