"""Helper functions for the cone laboratory."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile

import numpy as np

logger = logging.getLogger(__name__)


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Seeded PCG64 generator; accepts a plain int or a spawned SeedSequence."""
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent child seeds, one per parallel task, stable across runs."""
    return np.random.SeedSequence(seed).spawn(count)


def random_elements(A, count: int, rng: np.random.Generator, unit: bool = True) -> np.ndarray:
    """Gaussian coordinate vectors, optionally scaled to unit trace-form norm.

    Args:
        A: AlgebraSpec providing the trace form.
        count: number of rows to draw.
        rng: numpy generator.
        unit: normalise each row in the trace-form norm.

    Returns:
        np.ndarray: array of shape (count, A.dim)
    """
    raw = rng.standard_normal((count, A.dim))
    if not unit:
        return raw
    norms = np.sqrt(np.einsum("ai,ij,aj->a", raw, A.trace_form, raw))
    return raw / norms[:, None]


def random_interior(A, count: int, rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """Interior points exp(a) for random a with trace-form norm ``spread``."""
    from conelab.jalg import exp

    return np.array([exp(A, spread * a) for a in random_elements(A, count, rng)])


def array_digest(arr: np.ndarray, decimals: int = 12) -> str:
    """sha256 of an array rounded to ``decimals`` places."""
    rounded = np.round(np.asarray(arr, dtype=float), decimals) + 0.0  # drop negative zeros
    h = hashlib.sha256()
    h.update(str(rounded.shape).encode())
    h.update(rounded.tobytes())
    return h.hexdigest()


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file and os.replace."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Wrote {path}")


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dump_json(payload: dict) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)
