"""JSON serialisation of frames, blocks and reports.

Floats are written with ``repr`` (shortest string that round-trips), so
re-reading a file reproduces every value bit for bit.
"""

from __future__ import annotations

import enum
import json
import math
from pathlib import Path

import numpy as np

from .frames import FrameInstance
from .norms import Bounds, DimensionError, PNormSpace, format_p, parse_p

__all__ = [
    "FRAME_SCHEMA",
    "BLOCKS_SCHEMA",
    "frame_to_dict",
    "frame_from_dict",
    "load_frame",
    "save_frame",
    "load_blocks",
    "blocks_to_dict",
    "dumps",
]

FRAME_SCHEMA = "frame/1"
BLOCKS_SCHEMA = "blocks/1"


def _p_value(p: float):
    s = format_p(p)
    return s if s in ("1", "2", "inf") else p


def frame_to_dict(frame: FrameInstance) -> dict:
    d = {
        "schema": FRAME_SCHEMA,
        "p": _p_value(frame.p),
        "dim": frame.dim,
        "name": frame.name,
        "vectors": frame.vectors.tolist(),
        "functionals": frame.functionals.tolist(),
    }
    if frame.reconstruction_span is not None:
        d["reconstruction_span"] = frame.reconstruction_span.tolist()
    if frame.provenance:
        d["provenance"] = frame.provenance
    if frame.metadata:
        d["metadata"] = frame.metadata
    return d


def _matrix(doc: dict, key: str, dim: int) -> np.ndarray:
    try:
        A = np.array(doc[key], dtype=float)
    except KeyError:
        raise ValueError(f"frame file lacks {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{key!r} is not a numeric matrix: {exc}") from None
    if A.ndim != 2 or A.shape[1] != dim:
        raise DimensionError(f"{key!r} must be a list of length-{dim} rows")
    return A


def frame_from_dict(doc: dict) -> FrameInstance:
    if doc.get("schema") != FRAME_SCHEMA:
        raise ValueError(f"expected schema {FRAME_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        dim = int(doc["dim"])
        space = PNormSpace(dim, parse_p(doc["p"]))
    except KeyError as exc:
        raise ValueError(f"frame file lacks {exc.args[0]!r}") from None
    span = _matrix(doc, "reconstruction_span", dim) if "reconstruction_span" in doc else None
    return FrameInstance(
        space,
        _matrix(doc, "vectors", dim),
        _matrix(doc, "functionals", dim),
        name=str(doc.get("name", "frame")),
        provenance=str(doc.get("provenance", "")),
        reconstruction_span=span,
        metadata=dict(doc.get("metadata", {})),
    )


def _default(o):
    if isinstance(o, Bounds):
        return o.to_dict()
    if isinstance(o, enum.Enum):
        return o.value
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _finite(o):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(o, float) and not math.isfinite(o):
        return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


def dumps(obj) -> str:
    """Deterministic JSON text (stable key order, shortest round-trip floats)."""
    plain = json.loads(json.dumps(obj, default=_default))
    return json.dumps(_finite(plain), indent=2, allow_nan=False) + "\n"


def save_frame(frame: FrameInstance, path) -> None:
    Path(path).write_text(dumps(frame_to_dict(frame)))


def load_frame(path) -> FrameInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    return frame_from_dict(doc)


def blocks_to_dict(blocks) -> dict:
    return {"schema": BLOCKS_SCHEMA, "blocks": np.asarray(blocks, dtype=float).tolist()}


def load_blocks(path) -> np.ndarray:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):
        if doc.get("schema") not in (None, BLOCKS_SCHEMA):
            raise ValueError(f"expected schema {BLOCKS_SCHEMA!r}")
        doc = doc.get("blocks")
    try:
        B = np.array(doc, dtype=float)
    except (TypeError, ValueError):
        raise ValueError("blocks must be a list of equal-length numeric rows") from None
    if B.ndim != 2:
        raise ValueError("blocks must be a list of equal-length numeric rows")
    return B
