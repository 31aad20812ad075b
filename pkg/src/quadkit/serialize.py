"""File formats: 17-significant-digit CSV and JSON round trips.

CSV bodies are byte-reproducible across runs: fixed float formatting, '.'
decimal separator, deterministic row order, no timestamps.
"""

import hashlib
import json
from pathlib import Path

import numpy as np

from .orthopoly import DesignMatrix
from .quadrature import QuadratureRule
from .subselect import Selection


def fmt(value):
    return f"{float(value):.17g}"


def write_csv(path, rows, header=None):
    path = Path(path)
    lines = []
    if header:
        lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_points_csv(path):
    """Load a rule-format CSV: d coordinate columns then one weight column."""
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
    if data.shape[1] < 2:
        raise ValueError("expected at least one coordinate column and a weight column")
    return data[:, :-1], data[:, -1]


def save_rule(rule, path, fmt_kind="csv"):
    path = Path(path)
    if fmt_kind == "csv":
        path.write_text(rule.to_csv(), encoding="utf-8")
    elif fmt_kind == "json":
        path.write_text(json.dumps(rule.to_json(), indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown format {fmt_kind!r}")
    return path


def load_rule_json(path):
    return QuadratureRule.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _np_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def save_json(obj, path):
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True, default=_np_default) + "\n",
        encoding="utf-8")
    return Path(path)


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def design_checksum(design):
    """Stable digest of a design matrix's defining data (not its entries)."""
    payload = json.dumps(design.to_json(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def save_design(design, path):
    return save_json(design.to_json(), path)


def load_design(path):
    return DesignMatrix.from_json(load_json(path))


def save_selection(selection, path, design=None):
    obj = selection.to_json()
    if design is not None:
        obj["design_checksum"] = design_checksum(design)
    return save_json(obj, path)


def load_selection(path):
    obj = load_json(path)
    return Selection.from_json(obj), obj.get("design_checksum")


def save_gram_csv(report, path):
    n = report.gram.shape[0]
    rows = ([str(p), str(q), fmt(report.gram[p, q])] for p in range(n) for q in range(n))
    return write_csv(path, rows, header=["p", "q", "value"])
