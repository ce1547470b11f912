"""JSON schemas for matrices, states, resolutions, Kraus sets and fiducials.

    matrix / state   {"dim": d, "re": [[...]], "im": [[...]]}
    vector           {"re": [...], "im": [...]}
    resolution       {"dim": d, "outcomes": [{"c": c_k, "vector": vector}, ...]}
    kraus set        {"dim": d, "operators": [matrix, ...]}
    fiducial         {"dim": d, "vector": vector, "residual": r, "provenance": p}
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .measurements import KrausSet, RayResolution
from .sic import Fiducial
from .states import as_density


def _require(obj: dict, *keys):
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ValidationError("schema", f"missing keys {missing}")


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    _require(obj, "dim", "re", "im")
    try:
        a = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("schema", f"bad matrix entries: {exc}") from None
    d = int(obj["dim"])
    if a.shape != (d, d):
        raise ValidationError("shape", f"declared dim {d}, entries {a.shape}")
    return a


def state_from_json(obj: dict) -> np.ndarray:
    return as_density(matrix_from_json(obj))


def vector_to_json(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def vector_from_json(obj: dict) -> np.ndarray:
    _require(obj, "re", "im")
    re, im = np.asarray(obj["re"], dtype=float), np.asarray(obj["im"], dtype=float)
    if re.shape != im.shape or re.ndim != 1:
        raise ValidationError("shape", "re/im of a vector must be equal-length lists")
    return re + 1j * im


def resolution_to_json(m: RayResolution) -> dict:
    return {
        "dim": m.dim,
        "outcomes": [
            {"c": float(c), "vector": vector_to_json(v)} for c, v in zip(m.weights, m.vectors)
        ],
    }


def resolution_from_json(obj: dict) -> RayResolution:
    _require(obj, "dim", "outcomes")
    d = int(obj["dim"])
    weights, vectors = [], []
    for outcome in obj["outcomes"]:
        _require(outcome, "c", "vector")
        v = vector_from_json(outcome["vector"])
        if v.size != d:
            raise ValidationError("shape", f"outcome vector of length {v.size} in dim {d}")
        weights.append(float(outcome["c"]))
        vectors.append(v)
    if not vectors:
        raise ValidationError("schema", "no outcomes")
    return RayResolution(weights, vectors)


def kraus_to_json(k: KrausSet) -> dict:
    return {"dim": k.dim, "operators": [matrix_to_json(a) for a in k.operators]}


def kraus_from_json(obj: dict) -> KrausSet:
    _require(obj, "dim", "operators")
    return KrausSet(np.array([matrix_from_json(a) for a in obj["operators"]]))


def fiducial_to_json(f: Fiducial) -> dict:
    residual = None if math.isnan(f.residual) else f.residual
    return {
        "dim": f.dim,
        "vector": vector_to_json(f.vector),
        "residual": residual,
        "provenance": f.provenance,
    }


def fiducial_from_json(obj: dict) -> Fiducial:
    _require(obj, "dim", "vector")
    residual = obj.get("residual")
    return Fiducial(
        int(obj["dim"]),
        vector_from_json(obj["vector"]),
        obj.get("provenance", "optimized"),
        float("nan") if residual is None else float(residual),
    )


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError("input", f"cannot read {path}: {exc}") from None


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    """Inverse of :func:`rows_to_csv` for numeric tables."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append({k: (int(v) if v.lstrip("-").isdigit() else float(v)) for k, v in row.items()})
    return out
