"""Deterministic JSON/CSV writers.

All floats are rendered with 17 significant digits so outputs round-trip
exactly and repeated runs are byte-identical; dictionary keys are sorted.
"""

from __future__ import annotations

import math

import numpy as np


def format_float(x: float) -> str:
    if isinstance(x, (np.floating,)):
        x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _json_scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return "null"  # JSON has no non-finite literals
        return format_float(x)
    if isinstance(x, str):
        import json as _json

        return _json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * _level)
    pad_in = " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad_in}{_json_scalar(str(k))}: {dumps_json(v, indent, _level + 1)}"
            for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            return "[]"
        items = [f"{pad_in}{dumps_json(v, indent, _level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _json_scalar(obj)


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_json(obj))
        fh.write("\n")


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format_float(float(x))
    return str(x)


def write_csv(path, header, rows, append: bool = False) -> None:
    mode = "a" if append else "w"
    new_file = True
    if append:
        try:
            with open(path) as fh:
                new_file = fh.read(1) == ""
        except FileNotFoundError:
            new_file = True
    with open(path, mode) as fh:
        if new_file or not append:
            fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(c) for c in row) + "\n")
