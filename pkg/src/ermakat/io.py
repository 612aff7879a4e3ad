"""Deterministic text output: UTF-8, LF line endings, ``%.12e`` numbers."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

FMT = "%.12e"


def fmt(x: float) -> str:
    return FMT % x


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialise non-finite number {obj!r}")
        return fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[" + pad + ("," + pad).join(_encode(v, indent, level + 1) for v in obj) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written as ``%.12e``.

    The stdlib encoder offers no hook for float formatting, hence this small
    recursive writer. Output is valid JSON and parses with :func:`json.loads`.
    """
    return _encode(obj, indent, 0) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_json(path, obj) -> Path:
    return write_text(path, dumps(obj))


def write_csv_table(path, header, rows) -> Path:
    rows = np.asarray(rows, dtype=float)
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return write_text(path, "\n".join(lines) + "\n")
