"""File formats: CSV tables, JSON reports, MXG1/MXT1 binary grids, PGM previews.

Every writer goes through :func:`atomic_write`, so a failed run never leaves
a partial file behind.
"""
from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .diffmatrix import DerivMatrix
from .kernels import Kernel
from .response import FrequencyResponse

__all__ = [
    "FormatError",
    "atomic_write",
    "kernel_csv",
    "matrix_csv",
    "pgm_bytes",
    "read_mxg1",
    "read_mxt1",
    "response_csv",
    "results_csv",
    "spectral_json",
    "write_mxg1",
    "write_mxt1",
    "mxg1_bytes",
    "mxt1_bytes",
]

MXG1_MAGIC = b"MXG1"
MXT1_MAGIC = b"MXT1"
RESULT_FIELDS = ("harmonic", "sigma", "scheme", "l", "P",
                 "interior_nrmse", "boundary_nrmse", "trials")


class FormatError(ValueError):
    pass


def atomic_write(path, data: bytes | str) -> Path:
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    payload = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def kernel_csv(kernel: Kernel) -> str:
    rows = []
    for x, c, cf in zip(kernel.offsets, kernel.coeffs_exact, kernel.coeffs_float):
        rows.append((x.numerator, x.denominator, c.numerator, c.denominator, repr(float(cf))))
    return _csv_text(("offset_num", "offset_den", "coeff_num", "coeff_den", "coeff_f64"), rows)


def response_csv(resp: FrequencyResponse) -> str:
    rows = [(repr(float(w)), repr(float(h.real)), repr(float(h.imag)), repr(float(abs(h))))
            for w, h in zip(resp.omegas, resp.values)]
    return _csv_text(("omega", "re", "im", "abs"), rows)


def matrix_csv(D: DerivMatrix) -> str:
    head = f"# {D.N} {D.N} {D.N} {D.scheme.value} {D.n} {D.l} {D.P}\n"
    body = _csv_text(("row", "col", "value"), ((r, c, repr(v)) for r, c, v in D.triplets()))
    return head + body


def spectral_json(report) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"


def results_csv(rows: list[dict]) -> str:
    out = []
    for r in rows:
        out.append(tuple(repr(float(r[k])) if isinstance(r[k], float) else r[k]
                         for k in RESULT_FIELDS))
    return _csv_text(RESULT_FIELDS, out)


def mxg1_bytes(grid) -> bytes:
    g = np.asarray(grid, dtype="<f8")
    if g.ndim != 2:
        raise FormatError("MXG1 holds 2D grids only")
    return MXG1_MAGIC + struct.pack("<II", *g.shape) + np.ascontiguousarray(g).tobytes()


def write_mxg1(path, grid) -> Path:
    return atomic_write(path, mxg1_bytes(grid))


def read_mxg1(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MXG1_MAGIC or len(data) < 12:
        raise FormatError(f"{path}: not an MXG1 grid")
    rows, cols = struct.unpack("<II", data[4:12])
    payload = data[12:]
    if len(payload) != 8 * rows * cols:
        raise FormatError(f"{path}: payload has {len(payload)} bytes, expected {8 * rows * cols}")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(float)


def mxt1_bytes(tensor) -> bytes:
    t = np.asarray(tensor, dtype="<f8")
    head = MXT1_MAGIC + struct.pack("<I", t.ndim) + struct.pack(f"<{t.ndim}I", *t.shape)
    return head + t.reshape(-1, order="F").tobytes()


def write_mxt1(path, tensor) -> Path:
    return atomic_write(path, mxt1_bytes(tensor))


def read_mxt1(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MXT1_MAGIC or len(data) < 8:
        raise FormatError(f"{path}: not an MXT1 tensor")
    (ndim,) = struct.unpack("<I", data[4:8])
    end = 8 + 4 * ndim
    dims = struct.unpack(f"<{ndim}I", data[8:end])
    payload = data[end:]
    if len(payload) != 8 * int(np.prod(dims)):
        raise FormatError(f"{path}: payload size does not match dims {dims}")
    return np.frombuffer(payload, dtype="<f8").reshape(dims, order="F").astype(float)


def pgm_bytes(grid) -> bytes:
    """8-bit binary PGM with linear min-max scaling (a flat grid maps to 0)."""
    g = np.asarray(grid, dtype=float)
    lo, hi = float(g.min()), float(g.max())
    scaled = np.zeros(g.shape) if hi == lo else (g - lo) / (hi - lo) * 255.0
    pix = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    return f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode() + pix.tobytes()
