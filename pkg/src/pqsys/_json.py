"""JSON encodings for the shared file formats.

Complex matrices are stored row-major as [re, im] pairs.  Loaders raise
ValueError on malformed documents so the CLI can map them to its
input-error exit code.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .opcore import as_matrix
from .realize import JacobiRealization
from .sysmodel import PartitionedContraction
from .transfer import SqsFunctionData


def matrix_to_json(M) -> dict:
    M = as_matrix(M)
    rows, cols = M.shape
    data = [[float(v.real), float(v.imag)] for v in M.reshape(-1)]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        data = obj["data"]
    except (TypeError, KeyError) as exc:
        raise ValueError(f"not a matrix document: missing {exc}") from None
    if rows < 0 or cols < 0 or len(data) != rows * cols:
        raise ValueError(f"matrix document claims {rows}x{cols} but carries {len(data)} entries")
    out = np.zeros(rows * cols, dtype=complex)
    for k, pair in enumerate(data):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"matrix entry {k} is not an [re, im] pair")
        out[k] = float(pair[0]) + 1j * float(pair[1])
    return out.reshape(rows, cols)


def system_to_json(tau: PartitionedContraction) -> dict:
    return {
        "in_dim": tau.in_dim,
        "out_dim": tau.out_dim,
        "state_dim": tau.state_dim,
        "T": matrix_to_json(tau.T),
    }


def system_from_json(obj) -> PartitionedContraction:
    try:
        in_dim = int(obj["in_dim"])
        out_dim = int(obj["out_dim"])
        state_dim = int(obj["state_dim"])
        T = matrix_from_json(obj["T"])
    except (TypeError, KeyError) as exc:
        raise ValueError(f"not a system document: missing {exc}") from None
    return PartitionedContraction(T, in_dim, out_dim, state_dim)


def measure_to_json(f: SqsFunctionData) -> dict:
    return {
        "theta0": matrix_to_json(f.theta0),
        "atoms": [{"t": float(t), "sigma": matrix_to_json(s)} for t, s in f.atoms],
    }


def measure_from_json(obj) -> SqsFunctionData:
    try:
        theta0 = matrix_from_json(obj["theta0"])
        atoms = [(float(a["t"]), matrix_from_json(a["sigma"])) for a in obj["atoms"]]
    except (TypeError, KeyError) as exc:
        raise ValueError(f"not a measure document: missing {exc}") from None
    return SqsFunctionData(theta0, tuple(atoms))


def jacobi_to_json(jr: JacobiRealization) -> dict:
    return {
        "d": [float(jr.d.real), float(jr.d.imag)],
        "a": list(jr.a),
        "b": list(jr.b),
        "truncated": bool(jr.truncated),
    }


def jacobi_from_json(obj) -> JacobiRealization:
    try:
        d = float(obj["d"][0]) + 1j * float(obj["d"][1])
        a = tuple(float(x) for x in obj["a"])
        b = tuple(float(x) for x in obj["b"])
        truncated = bool(obj["truncated"])
    except (TypeError, KeyError, IndexError) as exc:
        raise ValueError(f"not a tridiagonal document: missing {exc}") from None
    return JacobiRealization(d, a, b, truncated)


def sniff_document(obj):
    """Build a system or measure object from a parsed JSON document,
    deciding by its keys."""
    if not isinstance(obj, dict):
        raise ValueError("document root must be an object")
    if "T" in obj:
        return system_from_json(obj)
    if "theta0" in obj:
        return measure_from_json(obj)
    raise ValueError("document is neither a system (key 'T') nor a measure (key 'theta0')")


def digest_files(paths) -> str:
    h = hashlib.sha256()
    for path in paths:
        with open(path, "rb") as fh:
            h.update(fh.read())
        h.update(b"\x00")
    return h.hexdigest()


def dump(obj, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
