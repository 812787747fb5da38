"""CSV and JSON serialization: numeric datasets, matrices, null-distribution caches.

All floating-point output uses 17 significant digits, which round-trips IEEE
doubles exactly, so cached distributions and written datasets reload to the
same binary values. Files are written atomically (temp file + rename) so a
failed run never leaves a truncated artifact behind.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile

import numpy as np

from .errors import MetadataMismatch, ParseError
from .nulldist import KINDS, EmpiricalNullDistribution

CACHE_FORMAT_VERSION = 1


def fmt17(value: float) -> str:
    """Decimal string with 17 significant digits (exact double round-trip)."""
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"cannot serialize non-finite value {v}")
    return format(v, ".17g")


def dumps_json(obj) -> str:
    """JSON text with floats rendered by fmt17 (stdlib json uses repr)."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt17(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)) or (isinstance(obj, np.ndarray) and obj.ndim == 1):
        return "[" + ", ".join(dumps_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {dumps_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_data_csv(path: str, header: list[str], rows: np.ndarray) -> None:
    """Write a numeric table as comma-separated values with a header row."""
    a = np.asarray(rows, dtype=float)
    if a.ndim != 2 or a.shape[1] != len(header):
        raise ValueError(f"rows shape {a.shape} does not match header of {len(header)} columns")
    lines = [",".join(header)]
    lines.extend(",".join(fmt17(v) for v in row) for row in a)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_data_csv(path: str) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header row; no missing values permitted.

    Raises
    ------
    ParseError
        On a row-length mismatch, a non-numeric cell, or an empty table.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        width = len(header)
        data = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"{path}:{lineno}: expected {width} cells, got {len(row)}")
            try:
                data.append([float(cell) for cell in row])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric cell") from None
    if not data:
        raise ParseError(f"{path}: no data rows")
    return header, np.array(data)


def write_dist_cache(path: str, dist: EmpiricalNullDistribution) -> None:
    """Serialize a null distribution to the JSON cache format."""
    doc = {
        "format_version": CACHE_FORMAT_VERSION,
        "meta": dist.meta(),
        "values": dist.values,
    }
    atomic_write_text(path, dumps_json(doc) + "\n")


def read_dist_cache(path: str, expect: dict | None = None) -> EmpiricalNullDistribution:
    """Load a cached null distribution, optionally checking requested metadata.

    ``expect`` may contain kind/nsample/pvariates/part; any mismatch between
    the request and the cached metadata raises MetadataMismatch rather than
    silently using a distribution simulated under different parameters.
    """
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format_version") != CACHE_FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported cache format")
    meta = doc.get("meta")
    values = doc.get("values")
    if not isinstance(meta, dict) or not isinstance(values, list):
        raise ParseError(f"{path}: cache missing meta/values")
    required = ("kind", "nsample", "pvariates", "part", "iterations", "seed")
    if any(k not in meta for k in required):
        raise ParseError(f"{path}: cache meta missing one of {required}")
    if meta["kind"] not in KINDS:
        raise ParseError(f"{path}: unknown kind {meta['kind']!r}")
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size != meta["iterations"]:
        raise ParseError(f"{path}: values length does not match iterations")
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        raise ParseError(f"{path}: values are not sorted ascending")
    if expect is not None:
        for key in ("kind", "nsample", "pvariates", "part"):
            if key in expect and expect[key] != meta[key]:
                raise MetadataMismatch(
                    f"{path}: cache has {key}={meta[key]!r}, requested {expect[key]!r}"
                )
    return EmpiricalNullDistribution(
        kind=meta["kind"],
        nsample=int(meta["nsample"]),
        pvariates=int(meta["pvariates"]),
        part=None if meta["part"] is None else int(meta["part"]),
        iterations=int(meta["iterations"]),
        seed=int(meta["seed"]),
        values=arr,
    )
