"""Canonical JSON encoding shared by the archive, CLI, and HTTP service.

All persisted and wire-format documents are serialized with sorted keys and
no whitespace so that identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json

__all__ = ["canonical_json", "canonical_bytes", "digest"]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")


def digest(*parts: bytes) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.hexdigest()
