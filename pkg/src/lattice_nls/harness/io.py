"""On-disk formats.

Field files are CSV::

    # m=256
    # h=0.2
    # component=u
    index,re,im
    0,1.2345678901234567e-01,0.0000000000000000e+00
    ...

Every float is written with 17 significant digits, so files round-trip
exactly.  JSON documents are written by :func:`dump_json`, which applies the
same float format and sorts keys, so equal data gives equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = [
    "HarnessIOError",
    "fmt_float",
    "dump_json",
    "write_text",
    "write_field_csv",
    "read_field_csv",
    "write_table_csv",
    "read_table_csv",
]


class HarnessIOError(OSError):
    """Reading or writing a harness file failed; the message names the path."""


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no NaN/Inf; such values become null
        return fmt_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise HarnessIOError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise HarnessIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def write_field_csv(path: str | Path, values: np.ndarray, spacing: float, component: str) -> Path:
    values = np.asarray(values, dtype=complex)
    lines = [f"# m={values.size}", f"# h={fmt_float(spacing)}", f"# component={component}", "index,re,im"]
    lines += [f"{i},{fmt_float(v.real)},{fmt_float(v.imag)}" for i, v in enumerate(values)]
    return write_text(path, "\n".join(lines) + "\n")


def read_field_csv(path: str | Path) -> tuple[np.ndarray, dict]:
    """Return ``(values, header)`` where header holds ``m``, ``h`` and ``component``."""
    header, rows = {}, []
    for line in _read_text(path).splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
        elif line and not line.startswith("index"):
            rows.append(line.split(","))
    try:
        m = int(header["m"])
        header = {"m": m, "h": float(header["h"]), "component": header.get("component", "")}
        idx = np.array([int(r[0]) for r in rows])
        vals = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    except (KeyError, ValueError, IndexError) as exc:
        raise HarnessIOError(f"malformed field file {path}: {exc}") from exc
    if idx.size != m or not np.array_equal(idx, np.arange(m)):
        raise HarnessIOError(f"malformed field file {path}: expected indices 0..{m - 1}")
    return vals, header


def write_table_csv(path: str | Path, columns: list[str], rows: list[dict]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            [fmt_float(row[c]) if isinstance(row[c], (float, np.floating)) else row[c] for c in columns]
        )
    return write_text(path, buf.getvalue())


def read_table_csv(path: str | Path) -> tuple[list[str], list[dict]]:
    reader = csv.reader(io.StringIO(_read_text(path)))
    try:
        columns = next(reader)
    except StopIteration:
        raise HarnessIOError(f"empty table {path}") from None
    rows = []
    for rec in reader:
        if len(rec) != len(columns):
            raise HarnessIOError(f"malformed row in {path}: {rec}")
        rows.append(dict(zip(columns, rec)))
    return columns, rows
