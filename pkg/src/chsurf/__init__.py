"""Pseudo-spectral solver for the binary fluid-surfactant Cahn-Hilliard
model with linear, decoupled, energy-stable time stepping."""

from .spectral import (
    Field,
    Grid,
    SpectralError,
    Spectrum,
    biharmonic,
    divergence,
    forward,
    gradient,
    inner,
    inverse,
    laplacian,
    mean,
    norm_l2,
    solve_constant_coeff,
)
from .model import (
    ModelParams,
    SimState,
    energy_original,
    energy_quadratized,
    g_of,
    h_of,
    init_aux,
    initial_state,
    mu_phi_continuous,
    mu_rho_continuous,
)
from .schemes import (
    SolverError,
    SolverOptions,
    StepFailure,
    StepReport,
    krylov_solve,
    step_ls1,
    step_ls2,
    step_reference_implicit,
)
from .diagnostics import DiagnosticsRow, assert_dissipation, collect
from .harness import (
    RunConfig,
    ic_smooth,
    ic_spinodal,
    run_convergence,
    run_energy_scan,
    run_simulation,
)
from .snapshots import SnapshotFormatError, SnapshotMeta, read_snapshot, write_snapshot

__version__ = "0.1.0"
