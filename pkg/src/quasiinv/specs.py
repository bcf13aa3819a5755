"""JSON channel specifications.

A spec is an object with a ``kind`` and per-kind parameters::

    {"kind": "pauli", "p": [0.1, 0.6, 0.2, 0.1]}
    {"kind": "mixed_rotation", "p": 0.3333, "theta": 2.0944}
    {"kind": "tetrahedron", "p": [0.1, 0.3, 0.3, 0.1]}
    {"kind": "tetrahedron", "p": 0.3, "p_prime": 0.1}
    {"kind": "amplitude_damping", "gamma": -0.5, "twisted": false}
    {"kind": "diagonal", "lambda": [0, 0, -1]}
    {"kind": "kraus", "operators": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}

Complex numbers are always ``[re, im]`` pairs and matrices are row-major.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .channel import (
    QubitChannel,
    from_kraus,
    make_amplitude_damping,
    make_diagonal,
    make_mixed_rotation,
    make_pauli,
    make_tetrahedron,
    make_tetrahedron_pair,
)

KINDS = ("kraus", "pauli", "mixed_rotation", "tetrahedron", "amplitude_damping", "diagonal")


class SpecError(ValueError):
    """Malformed spec document; ``field`` names the offending location."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _scalar(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SpecError(path, "must be finite")
    return float(value)


def _number(doc: dict, key: str, path: str) -> float:
    if key not in doc:
        raise SpecError(f"{path}.{key}", "missing required field")
    return _scalar(doc[key], f"{path}.{key}")


def _numbers(doc: dict, key: str, length: int, path: str) -> list[float]:
    if key not in doc:
        raise SpecError(f"{path}.{key}", "missing required field")
    value = doc[key]
    if not isinstance(value, list) or len(value) != length:
        raise SpecError(f"{path}.{key}", f"expected a list of {length} numbers")
    return [_scalar(v, f"{path}.{key}[{i}]") for i, v in enumerate(value)]


def _complex(value: Any, path: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise SpecError(path, f"complex numbers must be [re, im] pairs, got {value!r}")
    if not all(math.isfinite(v) for v in value):
        raise SpecError(path, "must be finite")
    return complex(value[0], value[1])


def _matrix(value: Any, path: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != 2:
        raise SpecError(path, "expected a 2x2 matrix (two rows)")
    out = np.zeros((2, 2), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != 2:
            raise SpecError(f"{path}[{i}]", "expected a row of two [re, im] entries")
        for j, entry in enumerate(row):
            out[i, j] = _complex(entry, f"{path}[{i}][{j}]")
    return out


def channel_from_spec(doc: Any) -> QubitChannel:
    """Build a channel from a decoded spec object.

    Schema problems raise :class:`SpecError`; physically invalid parameters
    raise the constructors' own errors.
    """
    if not isinstance(doc, dict):
        raise SpecError("$", "spec must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SpecError("$.kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    if kind == "kraus":
        ops = doc.get("operators")
        if not isinstance(ops, list) or not ops:
            raise SpecError("$.operators", "expected a nonempty list of 2x2 matrices")
        return from_kraus([_matrix(op, f"$.operators[{i}]") for i, op in enumerate(ops)])
    if kind == "pauli":
        return make_pauli(*_numbers(doc, "p", 4, "$"))
    if kind == "mixed_rotation":
        return make_mixed_rotation(_number(doc, "p", "$"), _number(doc, "theta", "$"))
    if kind == "tetrahedron":
        if isinstance(doc.get("p"), list):
            return make_tetrahedron(*_numbers(doc, "p", 4, "$"))
        return make_tetrahedron_pair(_number(doc, "p", "$"), _number(doc, "p_prime", "$"))
    if kind == "amplitude_damping":
        twisted = doc.get("twisted", False)
        if not isinstance(twisted, bool):
            raise SpecError("$.twisted", "expected true or false")
        return make_amplitude_damping(_number(doc, "gamma", "$"), twisted=twisted)
    return make_diagonal(*_numbers(doc, "lambda", 3, "$"))


def parse_channel_spec(text: str) -> QubitChannel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return channel_from_spec(doc)


def encode_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def kraus_spec(ch: QubitChannel) -> dict:
    """Spec of kind ``kraus`` that reproduces ``ch`` exactly."""
    return {
        "kind": "kraus",
        "operators": [
            [[encode_complex(z) for z in row] for row in K] for K in ch.kraus_matrices
        ],
    }
