"""Figure rendering for run and sweep reports (files only, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_run_figure(records, path) -> Path:
    """Two panels: total/oscillation energies and the boundedness ledger."""
    path = Path(path)
    t = np.array([r.t for r in records])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))

    ax1.plot(t, [r.E for r in records], label="E")
    ax1.plot(t, [r.E2 for r in records], label="E2")
    ax1.plot(t, [r.F for r in records], label="F", linestyle="--")
    ax1.set_xlabel("t")
    ax1.set_ylabel("energy")
    ax1.legend(frameon=False)
    ax1.set_title("energies and ledger")

    e_tilde = np.array([r.E_tilde for r in records])
    positive = e_tilde > 0
    if positive.any():
        ax2.semilogy(t[positive], e_tilde[positive])
    ax2.set_xlabel("t")
    ax2.set_ylabel("oscillation energy")
    ax2.set_title("x-oscillation decay")

    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def render_sweep_figure(axis_name, rows, path) -> Path:
    """Fitted decay rate and ledger growth against the sweep axis."""
    path = Path(path)
    ok = [r for r in rows if r["status"] == "ok"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    if ok:
        values = [r["value"] for r in ok]
        ax1.plot(values, [r["fitted_rate"] for r in ok], marker="o")
        ax2.plot(values, [r["F_ratio"] for r in ok], marker="s")
    ax1.set_xlabel(axis_name)
    ax1.set_ylabel("fitted decay rate")
    ax2.set_xlabel(axis_name)
    ax2.set_ylabel("F(T) / F(0)")
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def render_fit_figure(t, values, rate, window, path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(t, values, label="data")
    t0, t1 = window
    inside = (t >= t0) & (t <= t1)
    if inside.any():
        anchor_t = t[inside][0]
        anchor_v = values[inside][0]
        ax.semilogy(
            t[inside],
            anchor_v * np.exp(-rate * (t[inside] - anchor_t)),
            linestyle="--",
            label=f"rate {rate:.4g}",
        )
    ax.set_xlabel("t")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path
