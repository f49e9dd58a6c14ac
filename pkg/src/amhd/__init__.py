"""Pseudo-spectral lab for 2D MHD and tropical-climate systems with
horizontal-only dissipation, plus the anisotropic-analysis toolkit used
to verify their energy structure."""

from .grid import GridSpec, make_grid
from .spectral import (
    SpectralField,
    VectorField,
    dealias,
    derivative,
    divergence,
    from_spectral,
    leray_project,
    multiply,
    to_spectral,
)
from .decomposition import (
    SplitField,
    agmon_ratio,
    anisotropic_norm,
    poincare_ratio,
    split,
    split_divergence_report,
)
from .lp import (
    bernstein_ratio,
    besov_norm,
    bony_parts,
    dyadic_block,
    low_pass,
    sobolev_norm,
)
from .solver import (
    CFLError,
    InitialDataSpec,
    ModelParams,
    NumericsError,
    SimState,
    make_initial,
    nonlinear_rhs,
    run,
    smallness,
    step,
)
from .diagnostics import (
    DiagnosticsRecord,
    FLedger,
    commutator_probe,
    continuous_dependence,
    energy_identity_residual,
    f_functional,
    fit_decay_rate,
    record,
    tcm_cancellation_residual,
    vanishing_identity_suite,
)
from .snapshot import read_snapshot, write_snapshot

__version__ = "0.1.0"
