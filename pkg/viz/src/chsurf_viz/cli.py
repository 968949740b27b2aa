"""Command-line plotting front end.

    chsurf-plot energy --out energy.png series_a.csv series_b.csv ...
    chsurf-plot fields --out panel.png snap_*.chsf
"""

from __future__ import annotations

import argparse
import sys

from .chsf import ChsfError
from .plots import plot_energy, plot_fields
from .series import SeriesError


def cmd_energy(args):
    labels = args.labels.split(",") if args.labels else None
    try:
        out = plot_energy(args.inputs, args.out, labels=labels,
                          include_original=args.include_original)
    except (SeriesError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def cmd_fields(args):
    try:
        out = plot_fields(args.inputs, args.out, rho_max=args.rho_max)
    except (ChsfError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="chsurf-plot",
                                 description="Render solver outputs to image files")
    sub = ap.add_subparsers(dest="command", required=True)

    p_e = sub.add_parser("energy", help="energy decay curves from diagnostics CSVs")
    p_e.add_argument("inputs", nargs="+", help="diagnostics CSV files")
    p_e.add_argument("--out", required=True, help="output image path")
    p_e.add_argument("--labels", help="comma-separated curve labels")
    p_e.add_argument("--include-original", action="store_true",
                     help="also draw the unquadratized energy (dashed)")
    p_e.set_defaults(func=cmd_energy)

    p_f = sub.add_parser("fields", help="heatmap panels from CHSF snapshots")
    p_f.add_argument("inputs", nargs="+", help="CHSF snapshot files")
    p_f.add_argument("--out", required=True, help="output image path")
    p_f.add_argument("--rho-max", type=float, default=1.0, dest="rho_max",
                     help="upper color limit for the surfactant field")
    p_f.set_defaults(func=cmd_fields)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
