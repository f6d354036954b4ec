"""CSV and JSON writers with fixed number formatting.

Floats are written with 17 significant digits so values round-trip
exactly; the same inputs always produce the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def csv_text(columns, rows) -> str:
    """RFC-4180 CSV: CRLF line ends, minimal quoting."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(csv_text(columns, rows).encode("utf-8"))
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _json(v, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        v = list(v)
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in v):
            return "[" + ", ".join(_json(x, indent, level + 1) for x in v) + "]"
        return "[\n" + ",\n".join(pad + _json(x, indent, level + 1) for x in v) + "\n" + end + "]"
    if v is None:
        return "null"
    if isinstance(v, (float, np.floating)) and not math.isfinite(float(v)):
        return "null"
    if isinstance(v, (bool, np.bool_, int, np.integer, float, np.floating)):
        return format_value(v)
    return json.dumps(str(v), ensure_ascii=False)


def json_text(obj, indent: int = 2) -> str:
    """JSON with 17-significant-digit floats; non-finite floats become null."""
    return _json(obj, indent, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json_text(obj), encoding="utf-8")
    return path
