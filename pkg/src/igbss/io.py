"""Matrix CSV, PPM/CSV rasters and JSON helpers.

Matrix CSV layout: a ``rows,cols`` header line followed by ``rows`` lines of
``cols`` comma-separated numbers (row-major).  Floats are written with 17
significant digits so files round-trip exactly.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """Malformed input file; the message names the line and column."""


def format_matrix_csv(A: np.ndarray) -> str:
    A = np.atleast_2d(np.asarray(A))
    if A.ndim != 2:
        raise ValueError("can only write 2-D matrices")
    fmt = "%d" if np.issubdtype(A.dtype, np.integer) else "%.17g"
    lines = ["%d,%d" % A.shape]
    lines += [",".join(fmt % v for v in row) for row in A]
    return "\n".join(lines) + "\n"


def write_matrix_csv(path: str | Path, A: np.ndarray) -> None:
    Path(path).write_text(format_matrix_csv(A))


def parse_matrix_csv(text: str, source: str = "<string>") -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise DataFormatError("%s: empty file" % source)
    try:
        rows, cols = (int(v) for v in lines[0].split(","))
    except ValueError:
        raise DataFormatError("%s:1: header must be 'rows,cols', got %r" % (source, lines[0])) from None
    if rows < 0 or cols < 0:
        raise DataFormatError("%s:1: negative dimensions" % source)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != rows:
        raise DataFormatError("%s: header declares %d rows, found %d" % (source, rows, len(body)))
    out = np.empty((rows, cols))
    for r, line in enumerate(body):
        fields = line.split(",")
        if len(fields) != cols:
            raise DataFormatError("%s:%d: expected %d columns, found %d" % (source, r + 2, cols, len(fields)))
        for c, f in enumerate(fields):
            try:
                out[r, c] = float(f)
            except ValueError:
                raise DataFormatError("%s:%d:%d: not a number: %r" % (source, r + 2, c + 1, f)) from None
    if not np.all(np.isfinite(out)):
        r, c = np.argwhere(~np.isfinite(out))[0]
        raise DataFormatError("%s:%d:%d: non-finite value" % (source, r + 2, c + 1))
    return out


def read_matrix_csv(path: str | Path) -> np.ndarray:
    path = Path(path)
    return parse_matrix_csv(path.read_text(), str(path))


# rasters ---------------------------------------------------------------

def _ppm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataFormatError("truncated PPM header")
        tokens.append(data[start:pos])
    return tokens, pos + 1  # exactly one whitespace byte precedes the raster


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary (P6) PPM as an ``(height, width, 3)`` array."""
    data = Path(path).read_bytes()
    tokens, pos = _ppm_tokens(data, 4)
    if tokens[0] != b"P6":
        raise DataFormatError("%s: only binary PPM (P6) is supported, got %r" % (path, tokens[0]))
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataFormatError("%s: bad PPM header" % path) from None
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = width * height * 3
    if len(data) - pos < n * dtype.itemsize:
        raise DataFormatError("%s: raster shorter than %dx%d" % (path, width, height))
    raster = np.frombuffer(data, dtype=dtype, count=n, offset=pos)
    return raster.reshape(height, width, 3).astype(np.int64)


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an (height, width, 3) array")
    if image.min() < 0 or image.max() > 255:
        raise ValueError("PPM pixels must lie in 0..255")
    h, w, _ = image.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + image.astype(np.uint8).tobytes())


def read_raster(path: str | Path, channels: int = 3) -> np.ndarray:
    """Read a PPM, or a matrix CSV holding ``height x (width * channels)`` values."""
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        return read_ppm(path)
    A = read_matrix_csv(path)
    if A.shape[1] % channels:
        raise DataFormatError("%s: %d columns is not a multiple of %d channels" % (path, A.shape[1], channels))
    return A.reshape(A.shape[0], -1, channels)


# json ------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text())
