"""Canonical JSON serialization: sorted keys, 17-significant-digit floats,
complex scalars as [re, im] pairs.  Loading a canonical file and saving it
again is byte-identical, which makes instance and report files diff-able
and content-addressable.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

HASH_KEY = "content_hash"


def complex_to_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def matrix_to_pairs(m) -> list:
    """Row-major nested list of [re, im] pairs."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[complex_to_pair(v) for v in row] for row in m]


def pairs_to_matrix(rows) -> np.ndarray:
    return np.array([[pair_to_complex(v) for v in row] for row in rows], dtype=complex)


def vector_to_pairs(v) -> list:
    return [complex_to_pair(x) for x in np.asarray(v, dtype=complex).ravel()]


def pairs_to_vector(pairs) -> np.ndarray:
    return np.array([pair_to_complex(p) for p in pairs], dtype=complex)


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float cannot be serialized canonically")
    if x == 0.0:
        x = 0.0  # normalize -0.0 so reload/redump is stable
    return format(x, ".17g")


def _render(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items())
        body = ",".join(json.dumps(str(k)) + ":" + _render(v) for k, v in items)
        return "{" + body + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_render(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot canonically serialize {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    return _render(obj) + "\n"


def canonical_loads(text: str):
    return json.loads(text)


def content_hash(payload: dict) -> str:
    """SHA-256 of the canonical form with any embedded hash field removed."""
    stripped = {k: v for k, v in payload.items() if k != HASH_KEY}
    return hashlib.sha256(canonical_dumps(stripped).encode()).hexdigest()


def write_canonical(path, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_dumps(payload))


def read_canonical(path) -> dict:
    with open(path) as fh:
        return json.loads(fh.read())
