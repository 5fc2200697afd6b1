"""CSV and JSON readers/writers for the command-line tools.

Floats are written with ``repr``, the shortest string that parses back to the
same double, so files round-trip bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import TVSError


class DataFormatError(TVSError):
    pass


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header: list[str], columns: list) -> None:
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])


def read_data_csv(path) -> dict[str, np.ndarray]:
    """Read ``t,x,y[,shifted_effect]``; t must run 0, 1, 2, ..."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header[:3] != ["t", "x", "y"] or header[3:] not in ([], ["shifted_effect"]):
            raise DataFormatError(f"{path}: header must be t,x,y[,shifted_effect], got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                t = int(row[0])
                vals = [float(c) for c in row[1:]]
            except ValueError as exc:
                raise DataFormatError(f"{path}: row {lineno}: {exc}") from exc
            if not all(np.isfinite(vals)):
                raise DataFormatError(f"{path}: row {lineno}: non-finite value")
            if t != len(rows):
                raise DataFormatError(f"{path}: row {lineno}: expected t={len(rows)}, got {t}")
            rows.append(vals)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    arr = np.array(rows)
    out = {"t": np.arange(len(rows)), "x": arr[:, 0], "y": arr[:, 1]}
    if len(header) == 4:
        out["shifted_effect"] = arr[:, 2]
    return out


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}") from exc
