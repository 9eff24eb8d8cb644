"""Binary wave-function dumps and plot-ready CSV.

Dump layout (all little-endian)::

    4s   magic  b"SCWF"
    u32  version (1)
    u32  m
    f64  L, x0, hbar, t
    2**m pairs of f64 (re, im)
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import Grid1D, WaveFunction

MAGIC = b"SCWF"
VERSION = 1
_HEADER = struct.Struct("<4sII4d")


@dataclass(frozen=True)
class WaveDumpHeader:
    m: int
    L: float
    x0: float
    hbar: float
    t: float
    version: int = VERSION

    @property
    def payload_bytes(self) -> int:
        return 16 * (1 << self.m)


def encode_dump(psi: WaveFunction, t: float) -> bytes:
    g = psi.grid
    head = _HEADER.pack(MAGIC, VERSION, g.m, g.L, g.x0, psi.hbar, float(t))
    return head + np.ascontiguousarray(psi.values, dtype="<c16").tobytes()


def decode_dump(blob: bytes) -> tuple[WaveDumpHeader, WaveFunction]:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated wave-function dump")
    magic, version, m, L, x0, hbar, t = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported dump version {version}")
    header = WaveDumpHeader(m, L, x0, hbar, t, version)
    payload = blob[_HEADER.size:]
    if len(payload) != header.payload_bytes:
        raise ValueError(f"payload has {len(payload)} bytes, expected {header.payload_bytes}")
    values = np.frombuffer(payload, dtype="<c16").astype(complex)
    return header, WaveFunction(Grid1D(L, m, x0), hbar, values)


def write_dump(path: str | Path, psi: WaveFunction, t: float) -> None:
    Path(path).write_bytes(encode_dump(psi, t))


def read_dump(path: str | Path) -> tuple[WaveDumpHeader, WaveFunction]:
    return decode_dump(Path(path).read_bytes())


def fmt_float(x) -> str:
    """Shortest repr that round-trips (at most 17 significant digits)."""
    x = float(x)
    return repr(x) if math.isfinite(x) else str(x)


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, str, np.integer)) else fmt_float(v) for v in row])
    return buf.getvalue()
