import csv
import struct

import numpy as np
import pytest

HEADER = struct.Struct("<4sIIIdB")

COLUMNS = (
    "step", "time", "e_original", "e_modified", "mass_phi", "mass_rho",
    "aux_err_u", "aux_err_v", "corr_rho_grad", "iters_rho", "iters_phi",
)


def make_chsf(path, values, time=0.0, field_id=0, magic=b"CHSF", version=1):
    values = np.asarray(values, dtype="<f8")
    nx, ny = values.shape
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(magic, version, nx, ny, time, field_id))
        fh.write(values.tobytes(order="C"))
    return path


def make_series(path, n=50, e0=100.0, decay=0.5):
    """A plausible diagnostics CSV with exponentially decaying energies."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for k in range(n):
            t = 0.1 * k
            e = e0 * np.exp(-decay * t)
            w.writerow([k, t, e * 1.01, e, 0.0, 0.2, 1e-12, 1e-12,
                        min(0.9, 0.02 * k), 3, 7])
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(7)
