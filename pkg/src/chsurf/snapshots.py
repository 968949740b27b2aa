"""Binary field snapshots (CHSF format).

Layout: a 25-byte little-endian header
    magic    4 bytes  b"CHSF"
    version  u32      1
    nx, ny   u32 each
    time     f64
    field_id u8       0=phi, 1=rho, 2=U, 3=V
followed by nx*ny little-endian f64 samples, row-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .spectral import Field, Grid

MAGIC = b"CHSF"
VERSION = 1
HEADER = struct.Struct("<4sIIIdB")
HEADER_SIZE = HEADER.size  # 25 bytes

FIELD_IDS = {"phi": 0, "rho": 1, "u": 2, "v": 3}
FIELD_NAMES = {v: k for k, v in FIELD_IDS.items()}


class SnapshotFormatError(Exception):
    """Malformed CHSF file; carries the byte offset of the defect."""

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class SnapshotMeta:
    nx: int
    ny: int
    time: float
    field_id: int

    @property
    def field_name(self) -> str:
        return FIELD_NAMES.get(self.field_id, f"id{self.field_id}")


def write_snapshot(path, field: Field, time: float, field_id: int):
    if field_id not in FIELD_NAMES:
        raise ValueError(f"unknown field_id {field_id}")
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, g.nx, g.ny, time, field_id))
        fh.write(field.values.astype("<f8").tobytes(order="C"))


def read_snapshot(path, lx: float = 2.0 * np.pi, ly: float = 2.0 * np.pi):
    """Read a CHSF file; returns (Field, SnapshotMeta).

    Domain lengths are not stored in the header; callers simulating on a
    non-default box must pass them explicitly.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < HEADER_SIZE:
        raise SnapshotFormatError(
            f"file too short for header: expected {HEADER_SIZE} bytes, got {len(raw)}", 0
        )
    magic, version, nx, ny, time, field_id = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported version {version}", 4)
    expected = HEADER_SIZE + nx * ny * 8
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"payload length mismatch: expected {expected} bytes total, got {len(raw)}",
            HEADER_SIZE,
        )
    values = np.frombuffer(raw, dtype="<f8", offset=HEADER_SIZE).reshape(nx, ny).copy()
    grid = Grid(nx, ny, lx, ly)
    return Field(grid, values), SnapshotMeta(nx, ny, time, field_id)
