"""Atomic CSV and JSON writers with round-trippable number formatting."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np


def fmt(v):
    """17 significant digits so reruns can be compared byte for byte."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _tmp(path: Path) -> Path:
    return path.with_name(f".{path.name}.{os.getpid()}.tmp")


def write_csv(path, header, rows):
    """Write rows to ``path`` through a temporary file and a rename."""
    path = Path(path)
    tmp = _tmp(path)
    try:
        with open(tmp, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for r in rows:
                wr.writerow([fmt(v) for v in r])
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)
    return path


def _default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (complex, np.complexfloating)):
        o = complex(o)
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def write_json(path, obj):
    path = Path(path)
    tmp = _tmp(path)
    try:
        tmp.write_text(dumps(obj))
        tmp.replace(path)
    finally:
        tmp.unlink(missing_ok=True)
    return path
