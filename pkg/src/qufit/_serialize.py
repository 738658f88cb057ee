"""Text-object (JSON) serialization with 17-significant-digit numbers.

The writer is deterministic: identical objects produce byte-identical text,
and every float is rendered with %.17g, which round-trips IEEE doubles
exactly. Reading goes through the stdlib JSON parser.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _render(obj, pieces: list, indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            pieces.append(f'{pad}  {json.dumps(str(key))}: ')
            _render(value, pieces, indent + 1)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            pieces.append("[]")
            return
        flat = all(isinstance(v, (int, float, bool)) or v is None for v in items)
        if flat:
            pieces.append("[" + ", ".join(_scalar(v) for v in items) + "]")
            return
        pieces.append("[\n")
        for i, value in enumerate(items):
            pieces.append(pad + "  ")
            _render(value, pieces, indent + 1)
            pieces.append(",\n" if i < len(items) - 1 else "\n")
        pieces.append(pad + "]")
    else:
        pieces.append(_scalar(obj))


def _scalar(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite number {value!r}")
        return format(value, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    pieces: list = []
    _render(obj, pieces, 0)
    pieces.append("\n")
    return "".join(pieces)


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def complex_to_pairs(array: np.ndarray) -> list:
    """Row-major [re, im] pair list of a complex array."""
    flat = np.asarray(array, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def pairs_to_complex(pairs, shape) -> np.ndarray:
    data = np.asarray(pairs, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] != int(np.prod(shape)):
        raise ValueError("malformed [re, im] pair list")
    return (data[:, 0] + 1j * data[:, 1]).reshape(shape)
