"""File formats: field CSV, DataMatrix CSV, PGM heatmaps, peak lists.

Every writer goes through :func:`atomic_write`, so a reader never sees a
half-written file.
"""

import csv
import io
import math
import os
import tempfile

import numpy as np

from .forward import DataMatrix

FLOAT_FMT = "%.17g"


def atomic_write(path, payload):
    """Write ``payload`` (str or bytes) to a temp file beside ``path``, then rename."""
    data = payload.encode("utf-8") if isinstance(payload, str) else payload
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    return FLOAT_FMT % v


def field_csv_text(field, log_scale=False):
    names = list(field.grid.names)
    header = names + [field.label] + ([field.label + "_db"] if log_scale else [])
    pts = field.grid.points()
    cols = [pts[:, i] for i in range(pts.shape[1])] + [field.values]
    if log_scale:
        cols.append(field.db())
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_field_csv(field, path, log_scale=False):
    """One header line (axis names, label, optional ``<label>_db``) and one row per grid point."""
    atomic_write(path, field_csv_text(field, log_scale))


def read_field_csv(path):
    """``(header, array)`` of a field CSV; floats round-trip exactly."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def heatmap_pixels(field, log_scale=False):
    """``uint8`` image, top row = largest second-axis value, columns = first axis."""
    if field.grid.dimension != 2:
        raise ValueError("heatmaps need a 2-D field; write 1-D fields as CSV")
    vals = field.db() if log_scale else np.asarray(field.values, dtype=float)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        norm = np.zeros_like(vals)
    else:
        norm = (vals - lo) / (hi - lo)
    pix = np.floor(255.0 * norm + 0.5).astype(np.uint8)
    nx, ny = field.grid.shape
    return pix.reshape(nx, ny).T[::-1]


def pgm_bytes(field, log_scale=False):
    img = heatmap_pixels(field, log_scale)
    rows, cols = img.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def write_heatmap_pgm(field, path, log_scale=False):
    """Binary 8-bit PGM; pixel = round(255 (v - min) / (max - min))."""
    atomic_write(path, pgm_bytes(field, log_scale))


def read_pgm(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    cols, rows = (int(v) for v in parts[1].split())
    if int(parts[2]) != 255:
        raise ValueError("only maxval 255 is supported")
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def peaks_text(peaks, names):
    lines = [",".join(["rank"] + list(names) + ["value"])]
    for i, p in enumerate(peaks, 1):
        lines.append(",".join([str(i)] + [_fmt(c) for c in p.point] + [_fmt(p.value)]))
    return "\n".join(lines) + "\n"


def write_peaks(peaks, names, path):
    atomic_write(path, peaks_text(peaks, names))


def data_csv_text(data):
    rows, cols = data.shape
    k = "" if data.wavenumber is None else _fmt(data.wavenumber)
    buf = io.StringIO()
    buf.write("rows,cols,wavenumber,provenance\n")
    buf.write(f"{rows},{cols},{k},{data.provenance}\n")
    buf.write("row,col,re,im\n")
    m = data.matrix
    for r in range(rows):
        for c in range(cols):
            buf.write(f"{r},{c},{_fmt(m[r, c].real)},{_fmt(m[r, c].imag)}\n")
    return buf.getvalue()


def write_data_csv(data, path):
    """Header ``rows,cols,wavenumber,provenance``, then one ``row,col,re,im`` line per entry."""
    atomic_write(path, data_csv_text(data))


def read_data_csv(path, row_coords=None, col_coords=None):
    """Load a DataMatrix; every entry must appear exactly once."""
    with open(path, newline="") as fh:
        lines = list(csv.reader(fh))
    if len(lines) < 3 or lines[0] != ["rows", "cols", "wavenumber", "provenance"]:
        raise ValueError(f"{path}: missing 'rows,cols,wavenumber,provenance' header")
    try:
        rows, cols = int(lines[1][0]), int(lines[1][1])
        k = float(lines[1][2]) if lines[1][2].strip() else None
        provenance = lines[1][3].strip()
    except (ValueError, IndexError):
        raise ValueError(f"{path}: malformed size line") from None
    if k is not None and not math.isfinite(k):
        k = None
    if lines[2] != ["row", "col", "re", "im"]:
        raise ValueError(f"{path}: missing 'row,col,re,im' header")
    mat = np.zeros((rows, cols), dtype=complex)
    seen = np.zeros((rows, cols), dtype=bool)
    for n, line in enumerate(lines[3:], start=4):
        if not line:
            continue
        try:
            r, c, re, im = int(line[0]), int(line[1]), float(line[2]), float(line[3])
        except (ValueError, IndexError):
            raise ValueError(f"{path}: line {n}: expected row,col,re,im") from None
        if not (0 <= r < rows and 0 <= c < cols):
            raise ValueError(f"{path}: line {n}: index out of range")
        if seen[r, c]:
            raise ValueError(f"{path}: line {n}: duplicate entry ({r}, {c})")
        mat[r, c] = re + 1j * im
        seen[r, c] = True
    if not seen.all():
        raise ValueError(f"{path}: {int((~seen).sum())} matrix entries missing")
    labels = ("time", "element") if provenance == "aoa" else ("receiver", "source")
    rc = np.arange(rows, dtype=float) if row_coords is None else row_coords
    cc = np.arange(cols, dtype=float) if col_coords is None else col_coords
    return DataMatrix(mat, labels[0], rc, labels[1], cc, provenance, k)

