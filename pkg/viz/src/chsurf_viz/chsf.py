"""Read-only parser for CHSF field snapshots.

File layout (little-endian):
    magic    4 bytes  b"CHSF"
    version  u32      1
    nx, ny   u32 each
    time     f64
    field_id u8       0=phi, 1=rho, 2=U, 3=V
followed by nx*ny f64 samples, row-major.

Kept deliberately independent of the solver package so corrupted files
produced by any writer are diagnosed against the format itself.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"CHSF"
VERSION = 1
HEADER = struct.Struct("<4sIIIdB")
HEADER_SIZE = HEADER.size  # 25 bytes

FIELD_NAMES = {0: "phi", 1: "rho", 2: "u", 3: "v"}


class ChsfError(Exception):
    """Malformed CHSF file; the message names the offending file."""


@dataclass(frozen=True)
class Snapshot:
    path: str
    nx: int
    ny: int
    time: float
    field_id: int
    values: np.ndarray

    @property
    def field_name(self) -> str:
        return FIELD_NAMES.get(self.field_id, f"id{self.field_id}")


def read_chsf(path) -> Snapshot:
    path = str(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ChsfError(f"{path}: {exc}") from exc
    if len(raw) < HEADER_SIZE:
        raise ChsfError(f"{path}: truncated header ({len(raw)} of {HEADER_SIZE} bytes)")
    magic, version, nx, ny, time, field_id = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ChsfError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ChsfError(f"{path}: unsupported version {version}")
    expected = HEADER_SIZE + nx * ny * 8
    if len(raw) != expected:
        raise ChsfError(f"{path}: payload length mismatch "
                        f"(expected {expected} bytes total, got {len(raw)})")
    values = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE).reshape(nx, ny)
    if not np.isfinite(values).all():
        raise ChsfError(f"{path}: non-finite field values")
    return Snapshot(path, nx, ny, time, field_id, values)
