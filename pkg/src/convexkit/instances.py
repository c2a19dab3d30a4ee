"""JSON encoding and decoding of function and problem instances.

Function documents:

    {"type": "max_affine", "pieces": [{"a": [...], "b": 0.0}, ...]}
    {"type": "quadratic", "Q": [[...]], "c": [...], "r0": 0.0}
    {"type": "sum", "parts": [...]}

Problem documents add keys next to (or instead of) a bare function:

    {"f": <function>, "S": [[...]], "zeta": [...]}          restriction
    {"marginal": {"f": <function>, "S": [[...]]}}            partial minimization
    {"f": <function>, "domain": {"inequalities": [{"g": [...], "h": ...}],
                                 "box_radius": R}}           constrained argmin

Matrices are dense row-major lists of rows.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .functions import AffinePiece, MaxAffine, Quadratic, SumFunction
from .linalg import as_matrix, as_vector


def function_to_json(f) -> dict:
    if isinstance(f, MaxAffine):
        return {
            "type": "max_affine",
            "pieces": [{"a": [float(v) for v in p.a], "b": float(p.b)} for p in f.pieces],
        }
    if isinstance(f, Quadratic):
        return {
            "type": "quadratic",
            "Q": [[float(v) for v in row] for row in f.Q],
            "c": [float(v) for v in f.c],
            "r0": float(f.r0),
        }
    if isinstance(f, SumFunction):
        return {"type": "sum", "parts": [function_to_json(p) for p in f.parts]}
    raise TypeError(f"not a convex function: {type(f).__name__}")


def function_from_json(doc: dict):
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValueError("function document must be an object with a 'type' key")
    kind = doc["type"]
    if kind == "max_affine":
        pieces = [AffinePiece(as_vector(p["a"]), float(p["b"])) for p in doc["pieces"]]
        if not pieces:
            raise ValueError("max_affine needs at least one piece")
        return MaxAffine(pieces[0].a.shape[0], tuple(pieces))
    if kind == "quadratic":
        Q = as_matrix(doc["Q"])
        c = as_vector(doc.get("c", np.zeros(Q.shape[0])))
        return Quadratic(Q.shape[0], Q, c, float(doc.get("r0", 0.0)))
    if kind == "sum":
        parts = tuple(function_from_json(p) for p in doc["parts"])
        if not parts:
            raise ValueError("sum needs at least one part")
        return SumFunction(parts[0].dim, parts)
    raise ValueError(f"unknown function type: {kind!r}")


def matrix_to_json(M) -> list:
    return [[float(v) for v in row] for row in as_matrix(M)]


def vector_to_json(v) -> list:
    return [float(x) for x in as_vector(v)]


def domain_to_json(inequalities, box_radius: float) -> dict:
    return {
        "inequalities": [
            {"g": vector_to_json(g), "h": float(h)} for g, h in inequalities
        ],
        "box_radius": float(box_radius),
    }


def domain_from_json(doc: dict) -> tuple[list, float]:
    rows = [(as_vector(item["g"]), float(item["h"])) for item in doc.get("inequalities", [])]
    radius = float(doc["box_radius"])
    dims = {g.shape[0] for g, _ in rows}
    if len(dims) > 1:
        raise DimensionMismatch(f"inequality rows disagree on dimension: {sorted(dims)}")
    return rows, radius
