"""Loading algebras and extensions from JSON files or catalog selectors."""
from __future__ import annotations

import json
import logging

import numpy as np
from jsonschema import ValidationError, validate

from config.constants import ERROR_MESSAGES
from config.settings import SPECTRAL_MERGE_TOL
from conelab import catalog as cat
from conelab.errors import AsymmetricStructureError, InputError
from conelab.jalg import AlgebraSpec

logger = logging.getLogger(__name__)

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}

_SPARSE_ROW = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}

ALGEBRA_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "dim": {"type": "integer", "minimum": 1},
        "identity": {"type": "array", "items": {"type": "number"}},
        # sparse [k, i, j, value] rows, or the dense n x n x n tensor
        "structure": {
            "anyOf": [
                {"type": "array", "items": _SPARSE_ROW},
                {"type": "array", "items": _MATRIX},
            ],
        },
        "trace_form": _MATRIX,
        "spectral_merge": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["dim", "identity", "structure"],
    "additionalProperties": False,
}

EXTENSION_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "ambient": ALGEBRA_SCHEMA,
        "phi": _MATRIX,
        "coeffs": _MATRIX,
    },
    "required": ["ambient", "phi"],
    "additionalProperties": False,
}


def _validate(data, schema: dict, what: str) -> None:
    try:
        validate(instance=data, schema=schema)
    except ValidationError as e:
        logger.error(f"{what} JSON validation error: {e.message}")
        raise InputError(f"Invalid {what} file: {e.message}") from e


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputError(f"File not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in {path}: {e}") from e


def _sparse_structure(n: int, entries: list) -> np.ndarray:
    """Dense tensor from sparse [k, i, j, value] rows; i < j rows are mirrored to (k, j, i).

    An entry given for both (k, i, j) and (k, j, i) must agree, otherwise the
    tensor is asymmetric and rejected.
    """
    c = np.zeros((n, n, n))
    given = set()
    for entry in entries:
        if any(float(v) != int(v) or v < 0 for v in entry[:3]):
            raise InputError(f"Structure entry indices must be non-negative integers: {entry}")
        k, i, j = (int(v) for v in entry[:3])
        value = entry[3]
        if max(k, i, j) >= n:
            raise InputError(f"Structure entry {[k, i, j]} out of range for dim {n}")
        if (k, i, j) in given:
            raise InputError(f"Duplicate structure entry {[k, i, j]}")
        given.add((k, i, j))
        c[k, i, j] = value
    for k, i, j in given:
        if i < j and (k, j, i) not in given:
            c[k, j, i] = c[k, i, j]
    return c


def algebra_from_dict(data: dict, source: str = "<dict>") -> AlgebraSpec:
    """Validate and build an AlgebraSpec from its JSON object form."""
    _validate(data, ALGEBRA_SCHEMA, "algebra")
    n = data["dim"]
    rows = data["structure"]
    if not all(len(row) == 4 and not any(isinstance(v, list) for v in row) for row in rows):
        c = np.array(rows, dtype=float)
        if c.shape != (n, n, n):
            raise InputError(f"Structure tensor in {source} has shape {c.shape}, expected {(n, n, n)}")
    else:
        c = _sparse_structure(n, rows)
    try:
        A = AlgebraSpec(
            name=data.get("name", source),
            structure=c,
            identity=data["identity"],
            trace_form=data.get("trace_form"),
            spectral_merge=data.get("spectral_merge", SPECTRAL_MERGE_TOL),
        )
    except AsymmetricStructureError:
        logger.error(f"{source}: structure constants violate symmetry")
        raise
    logger.info(f"Loaded algebra {A.name} (dim {A.dim}) from {source}")
    return A


def load_algebra(path: str) -> AlgebraSpec:
    return algebra_from_dict(_read_json(path), source=path)


def load_extension_data(path: str) -> dict:
    """Validated extension file: ambient algebra, phi and optional coefficients.

    Returns:
        dict: ``name``, ``ambient`` (AlgebraSpec), ``phi`` and ``coeffs`` arrays
    """
    data = _read_json(path)
    _validate(data, EXTENSION_SCHEMA, "extension")
    ambient = algebra_from_dict(data["ambient"], source=f"{path}:ambient")
    phi = np.array(data["phi"], dtype=float)
    if phi.shape != (ambient.dim, ambient.dim):
        raise InputError(f"phi in {path} has shape {phi.shape}, expected {(ambient.dim,) * 2}")
    coeffs = np.array(data["coeffs"], dtype=float) if "coeffs" in data else None
    return {"name": data.get("name", path), "ambient": ambient, "phi": phi, "coeffs": coeffs}


def algebra_from_args(catalog: str | None = None, n: int | None = None, k: int | None = None,
                      file: str | None = None, summands: list[str] | None = None) -> AlgebraSpec:
    """Resolve the CLI algebra selector (exactly one of catalog or file)."""
    if (catalog is None) == (file is None):
        raise InputError("Exactly one of --catalog or --file is required")
    if file is not None:
        return load_algebra(file)
    name = cat.resolve_name(catalog)
    if name == "direct_sum":
        return cat.catalog(name, summands=[cat.parse_summand(s) for s in summands or []])
    size = k if name == "spin_factor" else n
    if size is None:
        flag = "--k" if name == "spin_factor" else "--n"
        raise InputError(ERROR_MESSAGES["BAD_PARAMETER"].format(name=name, detail=f"{flag} is required"))
    return cat.catalog(name, size)
