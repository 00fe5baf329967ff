"""Deterministic CSV and JSON-lines writers.

Floats are written with ``repr`` (shortest round-trip form) so identical
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

RECORD_COLUMNS = (
    "n1", "n2", "quantity", "point_re", "point_im",
    "observed_re", "observed_im", "predicted_re", "predicted_im", "abs_error",
)
SCHEMA_VERSION = 1


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def write_records(path, records) -> Path:
    return write_csv(path, RECORD_COLUMNS, (row for rec in records for row in rec.rows()))


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [jsonable(v.real), jsonable(v.imag)]
    return v


def write_jsonl(path, items) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for it in items:
            fh.write(json.dumps(jsonable(it), sort_keys=True) + "\n")
    return path


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
