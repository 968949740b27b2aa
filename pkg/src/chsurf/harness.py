"""Experiment drivers: configuration, initial conditions, simulation loop,
temporal convergence study, and the energy-stability scan.

All runs are deterministic: the spinodal initial noise comes from numpy's
PCG64 generator seeded from the config, and CSV floats are written with
full precision.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRow, assert_dissipation, collect
from .model import ModelParams, SimState, initial_state
from .schemes import SolverOptions, StepFailure, step_ls1, step_ls2, step_reference_implicit
from .snapshots import FIELD_IDS, read_snapshot, write_snapshot
from .spectral import Field, Grid, norm_l2

SCHEMES = ("ls1", "ls2", "implicit")


@dataclass(frozen=True)
class RunConfig:
    nx: int = 128
    ny: int = 128
    lx: float = 2.0 * np.pi
    ly: float = 2.0 * np.pi
    params: ModelParams = field(default_factory=ModelParams)
    scheme: str = "ls2"
    dt: float = 1e-3
    t_end: float = 1.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    ic: str = "spinodal"  # smooth | spinodal | file
    phi_bar: float = 0.0
    rho_bar: float = 0.2
    amplitude: float = 0.001
    seed: int = 0
    phi_file: str = ""
    rho_file: str = ""
    out_dir: str = "out"
    series_every: int = 1
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.ic not in ("smooth", "spinodal", "file"):
            raise ValueError(f"unknown initial condition {self.ic!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be >= dt")
        if self.series_every < 1:
            raise ValueError("series_every must be >= 1")
        if list(self.snapshot_times) != sorted(self.snapshot_times):
            raise ValueError("snapshot_times must be sorted")

    @property
    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.lx, self.ly)


def ic_smooth(grid: Grid) -> tuple[Field, Field]:
    """Smooth trigonometric initial data used by the accuracy study:
    phi0 = 0.3 cos(3x) + 0.5 cos(y), rho0 = 0.2 sin(2x) + 0.25 sin(y)."""
    x, y = grid.coords()
    phi0 = 0.3 * np.cos(3.0 * x) + 0.5 * np.cos(y)
    rho0 = 0.2 * np.sin(2.0 * x) + 0.25 * np.sin(y)
    return Field(grid, phi0), Field(grid, rho0)


def ic_spinodal(grid: Grid, phi_bar: float, rho_bar: float = 0.2,
                amp: float = 0.001, seed: int = 0) -> tuple[Field, Field]:
    """Uniform mixture with small random perturbations.

    Noise is uniform in [-1, 1] from a seeded PCG64 generator, mean-subtracted
    so the field means equal phi_bar and rho_bar exactly.
    """
    if amp < 0:
        raise ValueError("amplitude must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    noise_phi = rng.uniform(-1.0, 1.0, grid.shape)
    noise_rho = rng.uniform(-1.0, 1.0, grid.shape)
    noise_phi -= noise_phi.mean()
    noise_rho -= noise_rho.mean()
    return Field(grid, phi_bar + amp * noise_phi), Field(grid, rho_bar + amp * noise_rho)


def build_initial_state(cfg: RunConfig) -> SimState:
    grid = cfg.grid
    if cfg.ic == "smooth":
        phi0, rho0 = ic_smooth(grid)
    elif cfg.ic == "spinodal":
        phi0, rho0 = ic_spinodal(grid, cfg.phi_bar, cfg.rho_bar, cfg.amplitude, cfg.seed)
    else:
        phi0, _ = read_snapshot(cfg.phi_file, cfg.lx, cfg.ly)
        rho0, _ = read_snapshot(cfg.rho_file, cfg.lx, cfg.ly)
    return initial_state(phi0, rho0, cfg.params)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_series_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row.as_tuple()])


def read_series_csv(path) -> list[DiagnosticsRow]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected diagnostics columns {header}")
        rows = []
        for rec in r:
            rows.append(DiagnosticsRow(
                step=int(rec[0]), time=float(rec[1]), e_original=float(rec[2]),
                e_modified=float(rec[3]), mass_phi=float(rec[4]), mass_rho=float(rec[5]),
                aux_err_u=float(rec[6]), aux_err_v=float(rec[7]),
                corr_rho_grad=float(rec[8]), iters_rho=int(rec[9]), iters_phi=int(rec[10]),
            ))
    return rows


def _advance(state, cfg):
    """One step of the configured scheme; LS2 bootstraps its first step
    with LS1 when no history exists yet."""
    if cfg.scheme == "ls1":
        return step_ls1(state, cfg.params, cfg.dt, cfg.solver)
    if cfg.scheme == "ls2":
        if not state.has_history:
            return step_ls1(state, cfg.params, cfg.dt, cfg.solver)
        return step_ls2(state, cfg.params, cfg.dt, cfg.solver)
    new_state = step_reference_implicit(state, cfg.params, cfg.dt)
    return new_state, None


def run_simulation(cfg: RunConfig, progress=None):
    """Step from t=0 to t_end, writing the diagnostics CSV and any requested
    CHSF snapshots into cfg.out_dir.  Returns (final_state, rows)."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    series_path = os.path.join(cfg.out_dir, "series.csv")
    # Fail on unwritable output before doing any stepping.
    with open(series_path, "w"):
        pass

    state = build_initial_state(cfg)
    rows = [collect(state, cfg.params, None)]
    n_steps = max(1, round(cfg.t_end / cfg.dt))
    pending = list(cfg.snapshot_times)
    snap_idx = 0

    def maybe_snapshot(st):
        nonlocal snap_idx, pending
        while pending and st.time >= pending[0] - 1e-12:
            pending.pop(0)
            for name in ("phi", "rho"):
                fname = f"snapshot_{snap_idx:03d}_{name}.chsf"
                write_snapshot(os.path.join(cfg.out_dir, fname),
                               getattr(st, name), st.time, FIELD_IDS[name])
            snap_idx += 1

    maybe_snapshot(state)
    try:
        for n in range(1, n_steps + 1):
            state, report = _advance(state, cfg)
            if n % cfg.series_every == 0 or n == n_steps:
                rows.append(collect(state, cfg.params, report))
            maybe_snapshot(state)
            if progress is not None:
                progress(n, n_steps, state)
    except StepFailure as exc:
        write_series_csv(series_path, rows)
        raise StepFailure(f"step {state.step + 1} failed: {exc}") from exc
    write_series_csv(series_path, rows)
    return state, rows


def _rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(values ** 2)))


def _final_fields(cfg: RunConfig) -> tuple[Field, Field]:
    state = build_initial_state(cfg)
    n_steps = round(cfg.t_end / cfg.dt)
    for _ in range(n_steps):
        state, _ = _advance(state, cfg)
    return state.phi, state.rho


def run_convergence(cfg: RunConfig, dt_ladder, benchmark_dt=7.8125e-5,
                    schemes=("ls1", "ls2"), t_end=0.1, out_csv=None, verbose=True):
    """Temporal refinement study against an LS2 benchmark run.

    Error is the sum over phi and rho of the root-mean-square error over
    grid points at t_end (the L2 norm normalized to unit domain area);
    observed order is log2 of the error ratio between adjacent dt values.
    Returns {scheme: [(dt, err, order), ...]}.
    """
    ladder = list(dt_ladder)
    if sorted(set(ladder), reverse=True) != ladder:
        raise ValueError("dt ladder must be strictly decreasing")
    if benchmark_dt >= min(ladder):
        raise ValueError("benchmark dt must be below the ladder minimum")

    base = replace(cfg, ic="smooth", t_end=t_end)
    bench_cfg = replace(base, scheme="ls2", dt=benchmark_dt)
    phi_ref, rho_ref = _final_fields(bench_cfg)

    results = {}
    for scheme in schemes:
        col = []
        prev_err = None
        for dt in ladder:
            phi, rho = _final_fields(replace(base, scheme=scheme, dt=dt))
            err = _rms(phi.values - phi_ref.values) + _rms(rho.values - rho_ref.values)
            order = math.log2(prev_err / err) if prev_err is not None else float("nan")
            col.append((dt, err, order))
            prev_err = err
            if verbose:
                print(f"{scheme}  dt={dt:.6e}  err={err:.4e}  order={order:.3f}")
        results[scheme] = col

    if out_csv:
        with open(out_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme", "dt", "error", "order"])
            for scheme, col in results.items():
                for dt, err, order in col:
                    w.writerow([scheme, _fmt(dt), _fmt(err), _fmt(order)])
    return results


def run_energy_scan(cfg: RunConfig, dts, schemes=("ls1",), t_end=5.0,
                    dissipation_tol=None, verbose=True):
    """Run each (scheme, dt) combination and record its energy series.

    For the linear schemes the modified-energy dissipation is asserted; the
    implicit comparator may legitimately fail to converge at large dt, which
    is reported rather than raised.  Returns a list of result dicts.
    """
    out = []
    for scheme in schemes:
        for dt in dts:
            tag = f"{scheme}_dt{dt:g}"
            run_dir = os.path.join(cfg.out_dir, f"energy_{tag}")
            run_cfg = replace(cfg, scheme=scheme, dt=dt, t_end=t_end, out_dir=run_dir)
            rec = {"scheme": scheme, "dt": dt, "csv": os.path.join(run_dir, "series.csv")}
            try:
                _, rows = run_simulation(run_cfg)
            except StepFailure as exc:
                rec.update(status="failed", detail=str(exc), dissipative=None)
                out.append(rec)
                if verbose:
                    print(f"{tag}: FAILED ({exc})")
                continue
            rec["status"] = "ok"
            if scheme in ("ls1", "ls2"):
                tol = dissipation_tol
                if tol is None:
                    tol = 10.0 * run_cfg.solver.rel_tol
                ok, idx = assert_dissipation(rows, tol)
                rec["dissipative"] = ok
                rec["first_violation"] = idx
                if verbose:
                    print(f"{tag}: energy decay {'OK' if ok else f'VIOLATED at row {idx}'}")
            else:
                rec["dissipative"] = None
                if verbose:
                    print(f"{tag}: done")
            out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Config file handling (INI sections; every key also has a CLI flag and the
# CLI wins on conflict).

def load_config(path) -> RunConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)

    def get(section, key, cast, default):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default

    d = RunConfig()
    params = ModelParams(
        m_phi=get("params", "m_phi", float, d.params.m_phi),
        m_rho=get("params", "m_rho", float, d.params.m_rho),
        alpha=get("params", "alpha", float, d.params.alpha),
        beta=get("params", "beta", float, d.params.beta),
        eps=get("params", "eps", float, d.params.eps),
        eta=get("params", "eta", float, d.params.eta),
        theta=get("params", "theta", float, d.params.theta),
        rho_s=get("params", "rho_s", float, d.params.rho_s),
    )
    solver = SolverOptions(
        rel_tol=get("solver", "rel_tol", float, d.solver.rel_tol),
        max_iter=get("solver", "max_iter", int, d.solver.max_iter),
        precond=get("solver", "precond", str, d.solver.precond),
        fallback=get("solver", "fallback", bool, d.solver.fallback),
    )
    snap_raw = get("output", "snapshot_times", str, "")
    snapshot_times = tuple(float(s) for s in snap_raw.split(",") if s.strip()) if snap_raw else ()
    return RunConfig(
        nx=get("grid", "nx", int, d.nx),
        ny=get("grid", "ny", int, d.ny),
        lx=get("grid", "lx", float, d.lx),
        ly=get("grid", "ly", float, d.ly),
        params=params,
        scheme=get("time", "scheme", str, d.scheme),
        dt=get("time", "dt", float, d.dt),
        t_end=get("time", "t_end", float, d.t_end),
        solver=solver,
        ic=get("ic", "kind", str, d.ic),
        phi_bar=get("ic", "phi_bar", float, d.phi_bar),
        rho_bar=get("ic", "rho_bar", float, d.rho_bar),
        amplitude=get("ic", "amplitude", float, d.amplitude),
        seed=get("ic", "seed", int, d.seed),
        phi_file=get("ic", "phi_file", str, d.phi_file),
        rho_file=get("ic", "rho_file", str, d.rho_file),
        out_dir=get("output", "dir", str, d.out_dir),
        series_every=get("output", "series_every", int, d.series_every),
        snapshot_times=snapshot_times,
    )
