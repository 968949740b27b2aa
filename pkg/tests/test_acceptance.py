"""End-to-end acceptance suite.

One test per acceptance criterion; each prints a single PASS line on success
so the suite doubles as a checklist when run with `pytest -s tests/test_acceptance.py`.
The two 128x128 runs (temporal refinement, long coarsening run) dominate the
runtime; everything else finishes in seconds.
"""

import math

import numpy as np
import pytest

from chsurf import (
    Field,
    Grid,
    ModelParams,
    SolverOptions,
    biharmonic,
    energy_original,
    g_of,
    initial_state,
    inner,
    laplacian,
    mean,
    mu_phi_continuous,
    mu_rho_continuous,
    norm_l2,
    solve_constant_coeff,
    step_ls1,
    step_ls2,
    step_reference_implicit,
)
from chsurf.diagnostics import assert_dissipation, collect
from chsurf.harness import RunConfig, ic_smooth, ic_spinodal, run_convergence, run_simulation
from chsurf.spectral import divergence, grad_sq, gradient

P = ModelParams()

# Reference error magnitudes for the temporal refinement study (sum of the
# phi and rho RMS errors at t=0.1 against the fine-step benchmark).
REFERENCE_ERRORS = {
    "ls1": [4.21e-4, 2.16e-4, 1.09e-4, 5.52e-5, 2.77e-5, 1.38e-5, 6.95e-6],
    "ls2": [8.15e-5, 2.18e-5, 5.63e-6, 1.42e-6, 3.55e-7, 8.48e-8, 2.10e-8],
}
DT_LADDER = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4, 1.5625e-4]
ORDER_WINDOWS = {"ls1": (0.9, 1.1), "ls2": (1.8, 2.2)}


def _report(line):
    print(f"\nPASS: {line}")


def test_temporal_convergence_orders_and_magnitudes(tmp_path):
    cfg = RunConfig(nx=128, ny=128, ic="smooth", out_dir=str(tmp_path))
    results = run_convergence(cfg, DT_LADDER, benchmark_dt=7.8125e-5,
                              schemes=("ls1", "ls2"), t_end=0.1, verbose=False)
    for scheme in ("ls1", "ls2"):
        lo, hi = ORDER_WINDOWS[scheme]
        column = results[scheme]
        for k, ((dt, err, order), ref) in enumerate(zip(column, REFERENCE_ERRORS[scheme])):
            assert ref / 2 <= err <= ref * 2, \
                f"{scheme} dt={dt:g}: err={err:.3e} vs reference {ref:.3e}"
            # The finest rung runs at only twice the benchmark step, so for a
            # second-order scheme the benchmark's own error inflates the
            # observed rate there toward log2(5); only the magnitude is
            # meaningful on that rung.
            benchmark_limited = scheme == "ls2" and k == len(column) - 1
            if not math.isnan(order) and not benchmark_limited:
                assert lo <= order <= hi, f"{scheme} dt={dt:g}: order={order:.3f}"
    o1 = [o for _, _, o in results["ls1"]][1:]
    o2 = [o for _, _, o in results["ls2"]][1:-1]
    _report("temporal refinement: first/second order rates confirmed "
            f"(ls1 orders {min(o1):.2f}-{max(o1):.2f}, ls2 orders {min(o2):.2f}-{max(o2):.2f}), "
            "error magnitudes within 2x of reference")


def test_unconditional_energy_stability():
    grid = Grid(64, 64)
    opts = SolverOptions()
    tol = 10.0 * opts.rel_tol
    for dt in (1e-4, 1e-3, 1e-2, 1e-1, 1.0):
        phi0, rho0 = ic_spinodal(grid, 0.0, 0.2, 0.001, seed=3)
        state = initial_state(phi0, rho0, P)
        rows = [collect(state, P)]
        for _ in range(100):
            state, rep = step_ls1(state, P, dt, opts)
            rows.append(collect(state, P, rep))
        ok, idx = assert_dissipation(rows, tol)
        assert ok, f"dt={dt:g}: modified energy increased at row {idx}"
    _report("modified energy non-increasing over 100 steps for dt from 1e-4 to 1")


def test_discrete_energy_balance_identity():
    grid = Grid(32, 32)
    opts = SolverOptions(rel_tol=1e-12)
    dt = 1e-3
    phi0, rho0 = ic_smooth(grid)
    st = initial_state(phi0, rho0, P)

    def l2sq(f):
        return inner(f, f)

    def gnorm(f):
        fx, fy = gradient(f)
        return l2sq(fx) + l2sq(fy)

    worst = 0.0
    for _ in range(20):
        new, _ = step_ls1(st, P, dt, opts)
        g_n = st.rho.values - 0.5 * P.rho_s
        mu_rho = Field(grid, -P.beta * laplacian(new.rho).values
                       + (1.0 / P.eta ** 2) * g_n * new.v_aux.values
                       - P.theta * grad_sq(st.phi).values)
        mid = Field(grid, 0.5 * (new.phi.values + st.phi.values))
        mx, my = gradient(mid)
        coup = divergence(Field(grid, new.rho.values * mx.values),
                          Field(grid, new.rho.values * my.values))
        mu_phi = Field(grid, -laplacian(new.phi).values
                       + P.alpha * biharmonic(new.phi).values
                       + (1.0 / P.eps ** 2) * st.phi.values * new.u_aux.values
                       + 2.0 * P.theta * coup.values)
        # Telescoping balance: energy difference plus the positive
        # first-difference remainders equals the dissipation of the
        # reconstructed chemical potentials.
        lhs = ((P.beta / 2) * (gnorm(new.rho) - gnorm(st.rho) + gnorm(new.rho - st.rho))
               + 0.5 * (gnorm(new.phi) - gnorm(st.phi) + gnorm(new.phi - st.phi))
               + (P.alpha / 2) * (l2sq(laplacian(new.phi)) - l2sq(laplacian(st.phi))
                                  + l2sq(laplacian(new.phi - st.phi)))
               + (1.0 / (4 * P.eps ** 2)) * (l2sq(new.u_aux) - l2sq(st.u_aux)
                                             + l2sq(new.u_aux - st.u_aux))
               + (1.0 / (4 * P.eta ** 2)) * (l2sq(new.v_aux) - l2sq(st.v_aux)
                                             + l2sq(new.v_aux - st.v_aux))
               - P.theta * (inner(new.rho, grad_sq(new.phi)) - inner(st.rho, grad_sq(st.phi))))
        rhs = -P.m_phi * dt * gnorm(mu_phi) - P.m_rho * dt * gnorm(mu_rho)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
        st = new
    assert worst <= 1e-7, f"worst relative imbalance {worst:.3e}"
    _report(f"per-step energy balance identity holds to {worst:.2e} relative over 20 steps")


def test_mass_conservation_long_run():
    grid = Grid(32, 32)
    for scheme in ("ls1", "ls2"):
        phi0, rho0 = ic_spinodal(grid, 0.0, 0.2, 0.001, seed=7)
        state = initial_state(phi0, rho0, P)
        m_phi, m_rho = mean(state.phi), mean(state.rho)
        for n in range(1000):
            if scheme == "ls2" and state.has_history:
                state, _ = step_ls2(state, P, 1e-3)
            else:
                state, _ = step_ls1(state, P, 1e-3)
        d_phi = abs(mean(state.phi) - m_phi)
        d_rho = abs(mean(state.rho) - m_rho)
        assert d_phi <= 1e-10 and d_rho <= 1e-10, \
            f"{scheme}: mass drift phi={d_phi:.2e} rho={d_rho:.2e}"
    _report("field means conserved to 1e-10 over 1000 steps for both linear schemes")


def test_step_operator_spd_probes():
    grid = Grid(32, 32)
    rng = np.random.default_rng(2024)
    dt = 1e-3
    phi0, rho0 = ic_smooth(grid)
    state = initial_state(phi0, rho0, P)
    g_n = g_of(state.rho, P).values
    coeff_r = (2.0 / P.eta ** 2) * g_n * g_n
    coeff_p = (2.0 / P.eps ** 2) * state.phi.values ** 2
    rho_imp = state.rho

    def apply_rho(f):
        inv = solve_constant_coeff(0.0, 1.0, 0.0, f)
        pf = -P.beta * laplacian(f).values + coeff_r * f.values
        return Field(grid, inv.values / (P.m_rho * dt) + pf)

    def apply_phi(f):
        inv = solve_constant_coeff(0.0, 1.0, 0.0, f)
        fx, fy = gradient(f)
        coup = divergence(rho_imp * fx, rho_imp * fy)
        qf = (-laplacian(f).values + P.alpha * biharmonic(f).values
              + coeff_p * f.values + P.theta * coup.values)
        return Field(grid, inv.values / (P.m_phi * dt) + qf)

    for apply_op in (apply_rho, apply_phi):
        for _ in range(20):
            f = Field(grid, rng.standard_normal(grid.shape))
            g = Field(grid, rng.standard_normal(grid.shape))
            f = f + (-mean(f))
            g = g + (-mean(g))
            af, ag = apply_op(f), apply_op(g)
            assert abs(inner(af, g) - inner(f, ag)) <= 1e-9 * norm_l2(f) * norm_l2(g)
            assert inner(af, f) > 0.0
    _report("both step operators symmetric to 1e-9 and positive on 20 random mean-zero pairs")


def test_chemical_potential_variational_consistency():
    grid = Grid(64, 64)
    rng = np.random.default_rng(99)
    from conftest import TrigField
    phi = TrigField(rng).sample(grid)
    rho = TrigField(rng, scale=0.1).sample(grid)
    psi = TrigField(rng, scale=0.5).sample(grid)
    h = 1e-5
    worst = 0.0
    for which in ("phi", "rho"):
        if which == "phi":
            var = inner(mu_phi_continuous(phi, rho, P), psi)
            fd = (energy_original(phi + h * psi, rho, P)
                  - energy_original(phi + (-h) * psi, rho, P)) / (2 * h)
        else:
            var = inner(mu_rho_continuous(phi, rho, P), psi)
            fd = (energy_original(phi, rho + h * psi, P)
                  - energy_original(phi, rho + (-h) * psi, P)) / (2 * h)
        rel = abs(var - fd) / max(abs(var), 1.0)
        worst = max(worst, rel)
        assert rel <= 1e-6, f"mu_{which}: relative gap {rel:.3e}"
    _report(f"chemical potentials match energy central differences to {worst:.2e} relative")


def test_linear_scheme_tracks_implicit_reference():
    grid = Grid(32, 32)
    gaps = []
    for dt in (1e-3, 5e-4):
        phi0, rho0 = ic_smooth(grid)
        s_lin = initial_state(phi0, rho0, P)
        s_ref = initial_state(phi0, rho0, P)
        for _ in range(round(0.01 / dt)):
            s_lin, _ = step_ls1(s_lin, P, dt)
            s_ref = step_reference_implicit(s_ref, P, dt)
        gaps.append(norm_l2(s_lin.phi - s_ref.phi) + norm_l2(s_lin.rho - s_ref.rho))
    ratio = gaps[0] / gaps[1]
    assert ratio == pytest.approx(2.0, abs=0.4), f"gap ratio {ratio:.3f}"
    _report(f"discrepancy to the implicit reference halves with dt (ratio {ratio:.2f})")


def test_auxiliary_variable_drift_first_order():
    grid = Grid(64, 64)
    errs = []
    for dt in (2e-3, 1e-3, 5e-4):
        phi0, rho0 = ic_smooth(grid)
        state = initial_state(phi0, rho0, P)
        for _ in range(round(0.05 / dt)):
            state, _ = step_ls1(state, P, dt)
        drift = state.u_aux.values - (state.phi.values ** 2 - 1.0)
        errs.append(norm_l2(Field(grid, drift)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert r == pytest.approx(2.0, abs=0.3), f"drift ratios {ratios}"
    _report("auxiliary-variable drift halves with dt "
            f"(ratios {ratios[0]:.2f}, {ratios[1]:.2f})")


def test_phase_separation_localizes_surfactant(tmp_path):
    # Long coarsening run: surfactant concentrates at the fluid interface
    # while the modified energy decays between checkpoints.
    cfg = RunConfig(nx=128, ny=128, scheme="ls2", dt=1e-3, t_end=50.0,
                    ic="spinodal", phi_bar=0.0, rho_bar=0.2, amplitude=0.001,
                    seed=17, series_every=100, out_dir=str(tmp_path))
    _, rows = run_simulation(cfg)
    checkpoints = [r for r in rows if abs(r.time / 5.0 - round(r.time / 5.0)) < 1e-6]
    energies = [r.e_modified for r in checkpoints]
    assert len(energies) >= 10
    for a, b in zip(energies, energies[1:]):
        assert b < a, f"energy failed to decrease between checkpoints: {a} -> {b}"
    corr = rows[-1].corr_rho_grad
    assert rows[-1].time == pytest.approx(50.0, abs=1e-6)
    assert corr > 0.5, f"surfactant/interface correlation {corr:.3f} at t=50"
    _report("128x128 coarsening run: energy decays between checkpoints and "
            f"surfactant-interface correlation {corr:.2f} > 0.5 at t=50")
