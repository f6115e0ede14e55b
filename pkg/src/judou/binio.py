"""Little-endian binary helpers shared by the embedding and checkpoint formats."""

import struct

import numpy as np


class FormatError(ValueError):
    """A binary file failed magic, version, shape, or truncation checks."""


def read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file while reading {what} ({len(data)}/{n} bytes)")
    return data


def write_u32(f, value: int) -> None:
    f.write(struct.pack("<I", value))

def read_u32(f, what: str) -> int:
    return struct.unpack("<I", read_exact(f, 4, what))[0]

def write_u64(f, value: int) -> None:
    f.write(struct.pack("<Q", value))

def read_u64(f, what: str) -> int:
    return struct.unpack("<Q", read_exact(f, 8, what))[0]


def write_string(f, s: str) -> None:
    data = s.encode("utf-8")
    write_u32(f, len(data))
    f.write(data)

def read_string(f, what: str) -> str:
    n = read_u32(f, f"{what} length")
    return read_exact(f, n, what).decode("utf-8")


def write_matrix(f, m: np.ndarray) -> None:
    f.write(np.ascontiguousarray(m, dtype="<f8").tobytes())

def read_matrix(f, rows: int, cols: int, what: str) -> np.ndarray:
    data = read_exact(f, rows * cols * 8, what)
    return np.frombuffer(data, dtype="<f8").reshape(rows, cols).copy()
