"""Binary and CSV file formats for far-field matrices (FFM1), Cartesian or
polar contrast images (CGR1), and processed data (PRC1).

All binary formats are little-endian and self-describing: a 4-byte magic tag,
a fixed header, then f64 payloads.  Complex arrays are stored as interleaved
re/im f64 pairs in row-major order.
"""
from __future__ import annotations

import csv
import struct

import numpy as np

from .grids import FULL_APERTURE, ContrastGrid, DirectionSet, FarFieldMatrix, PolarGrid, ProcessedData

FFM_MAGIC = b"FFM1"
CGR_MAGIC = b"CGR1"
PRC_MAGIC = b"PRC1"


class FormatError(ValueError):
    """The file does not conform to the expected binary schema."""


def _read_exact(fh, n: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError("truncated file")
    return buf


def _write_complex(fh, values: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(values, dtype="<c16").tobytes())


def _read_complex(fh, shape) -> np.ndarray:
    count = int(np.prod(shape))
    buf = _read_exact(fh, 16 * count)
    return np.frombuffer(buf, dtype="<c16").reshape(shape).copy()


# ---------------------------------------------------------------- FFM1

def save_far_field(ff: FarFieldMatrix, path) -> None:
    """FFM1: magic; k (f64); N_obs, N_inc (i64); observation angles; incident
    angles; interleaved re/im f64 entries, observation-major."""
    with open(path, "wb") as fh:
        fh.write(FFM_MAGIC)
        fh.write(struct.pack("<dqq", ff.k, ff.obs.n, ff.inc.n))
        fh.write(np.ascontiguousarray(ff.obs.angles, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ff.inc.angles, dtype="<f8").tobytes())
        _write_complex(fh, ff.entries)


def load_far_field(path) -> FarFieldMatrix:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != FFM_MAGIC:
            raise FormatError(f"{path}: not an FFM1 file")
        k, n_obs, n_inc = struct.unpack("<dqq", _read_exact(fh, 24))
        if n_obs < 1 or n_inc < 1:
            raise FormatError(f"{path}: invalid direction counts")
        obs = np.frombuffer(_read_exact(fh, 8 * n_obs), dtype="<f8").copy()
        inc = np.frombuffer(_read_exact(fh, 8 * n_inc), dtype="<f8").copy()
        entries = _read_complex(fh, (n_obs, n_inc))
    return FarFieldMatrix(entries=entries, k=k,
                          obs=DirectionSet(obs), inc=DirectionSet(inc))


# ---------------------------------------------------------------- CGR1

def save_image(values: np.ndarray, path) -> None:
    """CGR1: magic; rows, cols (i64); real f64 values row-major.  Square
    arrays are Cartesian contrast grids; rectangular arrays are polar images
    (radial-major, rows = N2)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("image must be 2-D")
    with open(path, "wb") as fh:
        fh.write(CGR_MAGIC)
        fh.write(struct.pack("<qq", values.shape[0], values.shape[1]))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def save_contrast(q: ContrastGrid, path) -> None:
    save_image(q.values, path)


def load_image(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != CGR_MAGIC:
            raise FormatError(f"{path}: not a CGR1 file")
        rows, cols = struct.unpack("<qq", _read_exact(fh, 16))
        if rows < 1 or cols < 1:
            raise FormatError(f"{path}: invalid dimensions")
        buf = _read_exact(fh, 8 * rows * cols)
    return np.frombuffer(buf, dtype="<f8").reshape(rows, cols).copy()


def load_contrast(path) -> ContrastGrid:
    values = load_image(path)
    if values.shape[0] != values.shape[1]:
        raise FormatError(f"{path}: expected a square contrast grid")
    return ContrastGrid(values)


# ---------------------------------------------------------------- PRC1

def save_processed(u: ProcessedData, path) -> None:
    """PRC1: magic; c (f64); N1, N2 (i64); aperture half-angle (f64, +inf for
    full aperture); interleaved re/im f64 values, radial-major (N2 x N1)."""
    with open(path, "wb") as fh:
        fh.write(PRC_MAGIC)
        fh.write(struct.pack("<dqqd", u.c, u.grid.N1, u.grid.N2, u.aperture))
        _write_complex(fh, u.values)


def load_processed(path) -> ProcessedData:
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != PRC_MAGIC:
            raise FormatError(f"{path}: not a PRC1 file")
        c, n1, n2, aperture = struct.unpack("<dqqd", _read_exact(fh, 32))
        if n1 < 1 or n2 < 1 or c <= 0:
            raise FormatError(f"{path}: invalid header")
        values = _read_complex(fh, (n2, n1))
    return ProcessedData(values=values, c=c, grid=PolarGrid(int(n1), int(n2)),
                         aperture=aperture)


# ---------------------------------------------------------------- CSV

def contrast_to_csv(q: ContrastGrid, path) -> None:
    np.savetxt(path, q.values, delimiter=",")


def contrast_from_csv(path) -> ContrastGrid:
    return ContrastGrid(np.loadtxt(path, delimiter=",", ndmin=2))


def processed_to_csv(u: ProcessedData, path) -> None:
    """One row per node: radial index, angular index, r, theta, re, im."""
    grid = u.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "n", "r", "theta", "re", "im"])
        for i in range(grid.N2):
            for j in range(grid.N1):
                v = u.values[i, j]
                writer.writerow([i, j, grid.r[i], grid.theta[j], v.real, v.imag])
