"""Matrix file formats.

Text: a header line `d rows cols` (real) or `zd rows cols` (complex)
followed by whitespace-separated row-major entries; complex entries are
`re im` pairs. Binary: magic `RAYQ1`, little-endian u64 rows and cols,
then f64 entries. A binary container may hold several matrices back to
back, each with its own header.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = [
    "write_matrix_text",
    "read_matrix_text",
    "write_matrices_binary",
    "read_matrices_binary",
]

MAGIC = b"RAYQ1"


def write_matrix_text(path, m) -> None:
    m = np.asarray(m)
    path = Path(path)
    with path.open("w") as fh:
        if np.iscomplexobj(m):
            fh.write(f"zd {m.shape[0]} {m.shape[1]}\n")
            for row in m:
                fh.write(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row) + "\n")
        else:
            fh.write(f"d {m.shape[0]} {m.shape[1]}\n")
            for row in m.astype(np.float64):
                fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def read_matrix_text(path) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] not in ("d", "zd"):
            raise ValueError(f"bad matrix header in {path}: {header}")
        rows, cols = int(header[1]), int(header[2])
        values = np.array(fh.read().split(), dtype=np.float64)
    if header[0] == "d":
        if values.size != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {values.size}")
        return values.reshape(rows, cols)
    if values.size != 2 * rows * cols:
        raise ValueError(f"expected {2 * rows * cols} entries, got {values.size}")
    pairs = values.reshape(rows, cols, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def write_matrices_binary(path, matrices) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        for m in matrices:
            m = np.ascontiguousarray(np.asarray(m, dtype=np.float64))
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", m.shape[0], m.shape[1]))
            fh.write(m.tobytes())


def read_matrices_binary(path) -> list[np.ndarray]:
    path = Path(path)
    out: list[np.ndarray] = []
    data = path.read_bytes()
    pos = 0
    while pos < len(data):
        if data[pos:pos + 5] != MAGIC:
            raise ValueError(f"bad magic at offset {pos} in {path}")
        pos += 5
        rows, cols = struct.unpack_from("<QQ", data, pos)
        pos += 16
        n = rows * cols * 8
        if pos + n > len(data):
            raise ValueError(f"truncated matrix payload in {path}")
        m = np.frombuffer(data[pos:pos + n], dtype="<f8").reshape(rows, cols).copy()
        pos += n
        out.append(m)
    return out
