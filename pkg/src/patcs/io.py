"""File formats: PATMAT matrices, key=value sidecars, CSV export and 16-bit PGM images.

PATMAT is an ASCII header ``PATMAT <rows> <cols>\\n`` followed by the
row-major little-endian float64 payload.  Every writer goes through a
temporary file in the target directory and an atomic rename.
"""

from __future__ import annotations

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

__all__ = [
    "FormatError",
    "write_patmat",
    "read_patmat",
    "export_csv",
    "write_sidecar",
    "read_sidecar",
    "write_pgm",
    "read_pgm",
    "atomic_open",
]

_DTYPE = np.dtype("<f8")


class FormatError(ValueError):
    pass


@contextmanager
def atomic_open(path, mode="wb"):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_patmat(path, array) -> None:
    a = np.asarray(array)
    if np.iscomplexobj(a):
        raise TypeError("PATMAT stores real matrices; write real and imaginary parts separately")
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"PATMAT stores 2D arrays, got {a.ndim}D")
    with atomic_open(path) as fh:
        fh.write(f"PATMAT {a.shape[0]} {a.shape[1]}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(a, dtype=_DTYPE).tobytes())


def read_patmat(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing PATMAT header")
    parts = raw[:nl].decode("ascii", "replace").split()
    if len(parts) != 3 or parts[0] != "PATMAT":
        raise FormatError(f"{path}: bad header {raw[:nl]!r}")
    rows, cols = int(parts[1]), int(parts[2])
    body = raw[nl + 1:]
    if len(body) != rows * cols * 8:
        raise FormatError(f"{path}: expected {rows * cols * 8} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype=_DTYPE).reshape(rows, cols).astype(float)


def export_csv(path, array) -> None:
    a = np.atleast_2d(np.asarray(array, dtype=float))
    with atomic_open(path, "w") as fh:
        np.savetxt(fh, a, delimiter=",", fmt="%.17g")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def write_sidecar(path, meta: dict) -> None:
    lines = []
    for k in sorted(meta):
        v = _fmt(meta[k])
        if "\n" in v or "=" in k:
            raise ValueError(f"sidecar entry {k!r} is not a single key=value line")
        lines.append(f"{k}={v}\n")
    with atomic_open(path, "w") as fh:
        fh.writelines(lines)


def read_sidecar(path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise FormatError(f"{path}: malformed line {raw!r}")
        out[key.strip()] = val.strip()
    return out


def write_pgm(path, image, vmin=None, vmax=None) -> None:
    """16-bit binary PGM; values are mapped linearly from ``[vmin, vmax]`` onto ``0..65535``.

    Row 0 of ``image`` is written first; callers wanting the second array axis
    as the vertical image axis should transpose and flip beforehand.
    """
    a = np.asarray(image, dtype=float)
    if a.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    lo = float(np.min(a)) if vmin is None else float(vmin)
    hi = float(np.max(a)) if vmax is None else float(vmax)
    scale = 65535.0 / (hi - lo) if hi > lo else 0.0
    q = np.clip(np.rint((a - lo) * scale), 0, 65535).astype(">u2")
    with atomic_open(path) as fh:
        fh.write(f"P5\n{a.shape[1]} {a.shape[0]}\n65535\n".encode("ascii"))
        fh.write(q.tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos].decode("ascii"))
    pos += 1
    if tokens[0] != "P5":
        raise FormatError(f"{path}: not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dt = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(raw[pos:], dtype=dt, count=w * h).reshape(h, w).astype(np.int64)
