"""Command-line entry point.

Subcommands: simulate, converge, energy-scan, inspect.  Every config-file key
has a matching flag; flags override the file.  Exit status is nonzero iff a
step or an assertion failed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .harness import RunConfig, load_config, run_convergence, run_energy_scan, run_simulation
from .schemes import StepFailure
from .snapshots import SnapshotFormatError, read_snapshot


def _parse_times(raw):
    return tuple(float(s) for s in raw.split(",") if s.strip())


def _parse_floats(raw):
    return [float(s) for s in raw.split(",") if s.strip()]


def _add_common(p):
    p.add_argument("--config", help="INI config file")
    p.add_argument("--scheme", choices=["ls1", "ls2", "implicit"])
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--phi-bar", type=float, dest="phi_bar")
    p.add_argument("--ic", choices=["smooth", "spinodal", "file"])
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--snapshot-times", dest="snapshot_times")
    p.add_argument("--series-every", type=int, dest="series_every")


def _build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("scheme", "dt", "t_end", "nx", "ny", "seed", "phi_bar",
                "ic", "out_dir", "series_every"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "snapshot_times", None) is not None:
        overrides["snapshot_times"] = _parse_times(args.snapshot_times)
    return replace(cfg, **overrides)


def cmd_simulate(args):
    cfg = _build_config(args)
    try:
        state, rows = run_simulation(cfg)
    except StepFailure as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 1
    last = rows[-1]
    print(f"done: t={state.time:g} after {state.step} steps; "
          f"E_mod={last.e_modified:.6e}  mass_phi={last.mass_phi:.6e}")
    return 0


def cmd_converge(args):
    cfg = _build_config(args)
    try:
        results = run_convergence(
            cfg,
            _parse_floats(args.dts),
            benchmark_dt=args.benchmark_dt,
            schemes=args.schemes.split(","),
            t_end=args.t_end if args.t_end is not None else 0.1,
            out_csv=args.table,
        )
    except StepFailure as exc:
        print(f"convergence run failed: {exc}", file=sys.stderr)
        return 1
    for scheme, col in results.items():
        errs = [err for _, err, _ in col]
        if any(b >= a for a, b in zip(errs, errs[1:])):
            print(f"warning: {scheme} errors are not monotone down the ladder", file=sys.stderr)
    return 0


def cmd_energy_scan(args):
    cfg = _build_config(args)
    records = run_energy_scan(
        cfg,
        _parse_floats(args.dts),
        schemes=args.schemes.split(","),
        t_end=args.t_end if args.t_end is not None else 5.0,
    )
    bad = [r for r in records if r.get("dissipative") is False]
    return 1 if bad else 0


def cmd_inspect(args):
    try:
        fld, meta = read_snapshot(args.snapshot)
    except SnapshotFormatError as exc:
        print(f"invalid snapshot: {exc}", file=sys.stderr)
        return 1
    v = fld.values
    print(f"{args.snapshot}: field={meta.field_name} grid={meta.nx}x{meta.ny} "
          f"time={meta.time:g}")
    print(f"min={v.min():.6e} max={v.max():.6e} mean={np.mean(v):.6e}")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="chsurf",
                                 description="Binary fluid-surfactant Cahn-Hilliard solver")
    sub = ap.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one trajectory")
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_conv = sub.add_parser("converge", help="temporal convergence study")
    _add_common(p_conv)
    p_conv.add_argument("--dts", default="1e-2,5e-3,2.5e-3,1.25e-3,6.25e-4,3.125e-4,1.5625e-4")
    p_conv.add_argument("--benchmark-dt", type=float, default=7.8125e-5, dest="benchmark_dt")
    p_conv.add_argument("--schemes", default="ls1,ls2")
    p_conv.add_argument("--table", default="convergence.csv")
    p_conv.set_defaults(func=cmd_converge)

    p_scan = sub.add_parser("energy-scan", help="energy stability scan over dt")
    _add_common(p_scan)
    p_scan.add_argument("--dts", default="1e-2,1e-3,5e-4,1e-4")
    p_scan.add_argument("--schemes", default="ls1")
    p_scan.set_defaults(func=cmd_energy_scan)

    p_ins = sub.add_parser("inspect", help="print snapshot header and stats")
    p_ins.add_argument("snapshot")
    p_ins.set_defaults(func=cmd_inspect)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
