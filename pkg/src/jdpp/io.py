"""File formats: kernel/G/phi/continuous-spec JSON in, JSON/JSONL/CSV out.

JSON floats are written with 17 significant digits so they round-trip
bit-exactly; CSV rounds to 12.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable

import numpy as np

from .expr import compile_expression
from .jop import JKernel
from .kernels import ContinuousKernelSpec


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if all(c not in s for c in ".eEn"):
        s += ".0"
    return s


def dumps(obj: Any) -> str:
    """Compact JSON with 17-significant-digit floats."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": obj.real, "im": obj.imag})
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(header: list[str], rows: Iterable[list], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([
            format(v, ".12g") if isinstance(v, (float, np.floating)) else v for v in row
        ])
    return buf.getvalue()


def read_json(path: str) -> Any:
    with open(path) as fh:
        return json.load(fh)


def load_kernel(path: str) -> JKernel:
    return JKernel.from_dict(read_json(path))


def load_matrix(data: Any) -> np.ndarray:
    """Complex matrix from ``{"re": [[..]], "im": [[..]]?}`` or a bare nested list."""
    if isinstance(data, dict):
        if "re" not in data:
            raise ValueError("matrix JSON needs 're'")
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ValueError("'re' and 'im' differ in shape")
        m = re + 1j * im
    else:
        m = np.asarray(data, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got {m.ndim} dimensions")
    return m


def load_phi(path: str) -> np.ndarray:
    data = read_json(path)
    if isinstance(data, dict):
        data = data["phi"]
    phi = np.asarray(data, dtype=float)
    if phi.ndim != 1:
        raise ValueError("phi must be a flat list of numbers")
    return phi


def continuous_spec_from_dict(data: dict) -> ContinuousKernelSpec:
    def interval(key):
        part = data.get(key)
        if part is None:
            return None
        return (float(part["a"]), float(part["b"]))

    blocks = {name: compile_expression(src) for name, src in data.get("blocks", {}).items()}
    return ContinuousKernelSpec(
        part1=interval("part1"),
        part2=interval("part2"),
        blocks=blocks,
        quadrature=data.get("quadrature", "midpoint"),
        points_per_part=int(data.get("n", 64)),
    )
