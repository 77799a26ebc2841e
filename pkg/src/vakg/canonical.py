"""Canonical serialization of property maps.

The byte sequence produced by :func:`state_bytes` is the exact input to the
SHA-256 state fingerprint, so it must never change. The layout is::

    {"lane":"<LaneName>","payload":<canonical payload>}

with the rules below applied recursively to the payload:

* objects: keys are strings, emitted sorted by their UTF-8 bytes (which is
  the same order as Unicode code points), ``"key":value`` pairs joined by
  ``,`` with no whitespace anywhere;
* strings: JSON string literals, non-ASCII characters written as raw UTF-8,
  ``"`` ``\\`` and control characters escaped as in RFC 8259 (``\\n``,
  ``\\t``, ... and ``\\u00XX`` for the rest);
* integers: decimal without leading zeros or ``+``;
* floats: shortest repr that round-trips (Python ``float.__repr__``), so a
  float always contains ``.``, ``e`` or both, and never collides with an
  integer; NaN and infinities are rejected;
* booleans: ``true`` / ``false``;
* lists: ``[a,b,...]`` in the given order.

``null`` is not a legal payload value.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import PayloadError

PropertyMap = dict

RESERVED_KEYS = ("subtasks", "attachments", "delta")


def normalize(value: Any, _path: str = "$") -> Any:
    """Validate a payload value and return a detached, key-sorted copy."""
    if isinstance(value, bool) or isinstance(value, int) or isinstance(value, str):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise PayloadError(f"non-finite float at {_path}")
        return value
    if isinstance(value, dict):
        out = {}
        for key in sorted(value, key=_key_order):
            if not isinstance(key, str):
                raise PayloadError(f"non-string key {key!r} at {_path}")
            out[key] = normalize(value[key], f"{_path}.{key}")
        return out
    if isinstance(value, (list, tuple)):
        return [normalize(v, f"{_path}[{i}]") for i, v in enumerate(value)]
    raise PayloadError(f"unsupported value of type {type(value).__name__} at {_path}")


def normalize_map(payload: Any) -> dict:
    if payload is None:
        return {}
    if not isinstance(payload, dict):
        raise PayloadError("property map must be an object")
    out = normalize(payload)
    _check_reserved(out)
    return out


def _key_order(key: Any):
    return key.encode("utf-8") if isinstance(key, str) else b""


def _check_reserved(payload: dict) -> None:
    for key in ("subtasks", "attachments"):
        if key in payload:
            items = payload[key]
            if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
                raise PayloadError(f"reserved key {key!r} must be a list of strings")


def dumps(value: Any) -> str:
    """Canonical JSON text of an already-normalized value."""
    return json.dumps(
        value,
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
        allow_nan=False,
    )


def state_bytes(lane_name: str, payload: dict) -> bytes:
    return ('{"lane":' + dumps(lane_name) + ',"payload":' + dumps(payload) + "}").encode("utf-8")
