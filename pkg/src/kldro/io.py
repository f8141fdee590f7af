"""File formats: observations, cost matrices, centers, CSV and JSON outputs."""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .simplex import CostMatrix, Distribution


def read_observations(path: str | Path) -> list[int]:
    """One 1-based scenario id per line; optional header line ``scenario``."""
    out = []
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1 and line.lower() == "scenario":
                continue
            line = line.split(",")[0].strip()
            try:
                value = int(line)
            except ValueError:
                raise InputError(f"{path}:{lineno}: expected an integer scenario id, got {line!r}") from None
            if value < 1:
                raise InputError(f"{path}:{lineno}: scenario ids are 1-based, got {value}")
            out.append(value)
    if not out:
        raise InputError(f"{path}: no observations")
    return out


def read_cost_matrix(path: str | Path) -> CostMatrix:
    """CSV with a header row; first column is the decision label."""
    with open(path, newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InputError(f"{path}: need a header row and at least one decision row")
    header = rows[0][1]
    d = len(header) - 1
    if d < 1:
        raise InputError(f"{path}:1: header needs a label column and at least one scenario column")
    labels, entries = [], []
    for lineno, row in rows[1:]:
        if len(row) != d + 1:
            raise InputError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"{path}:{lineno}: non-finite cost")
        labels.append(row[0].strip())
        entries.append(vals)
    return CostMatrix(np.array(entries), tuple(labels))


def read_centers(path: str | Path) -> list[Distribution]:
    """CSV of distributions, one per row; a non-numeric first row is a header."""
    out = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not any(c.strip() for c in row):
                continue
            try:
                vals = [_parse_real(c) for c in row]
            except ValueError:
                if lineno == 1:
                    continue
                raise InputError(f"{path}:{lineno}: cannot parse {row}") from None
            out.append(Distribution(vals))
    if not out:
        raise InputError(f"{path}: no centers")
    return out


def _parse_real(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def parse_vector(text: str) -> list[float]:
    try:
        return [_parse_real(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse vector {text!r}") from None


def fmt(x) -> str:
    """Shortest string that parses back to the same double."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no infinities; keep them readable
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def slugify(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_") or "x"
