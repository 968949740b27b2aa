"""Reader for the solver's diagnostics CSV (one row per recorded step)."""

from __future__ import annotations

import csv

import numpy as np

COLUMNS = (
    "step", "time", "e_original", "e_modified", "mass_phi", "mass_rho",
    "aux_err_u", "aux_err_v", "corr_rho_grad", "iters_rho", "iters_phi",
)


class SeriesError(Exception):
    """Diagnostics CSV does not match the expected schema."""


def read_series(path) -> dict:
    """Parse a diagnostics CSV into a dict of named float arrays.

    The header must contain every expected column (extra columns are
    tolerated and ignored); an empty body is an error.
    """
    path = str(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SeriesError(f"{path}: empty file") from None
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise SeriesError(f"{path}: missing column {missing[0]!r}")
        idx = {c: header.index(c) for c in COLUMNS}
        rows = [rec for rec in reader if rec]
    if not rows:
        raise SeriesError(f"{path}: no data rows")
    try:
        return {c: np.array([float(rec[idx[c]]) for rec in rows]) for c in COLUMNS}
    except (ValueError, IndexError) as exc:
        raise SeriesError(f"{path}: malformed row ({exc})") from exc
