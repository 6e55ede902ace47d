"""In-memory engine store with insert-only semantics per id."""

from __future__ import annotations

import threading

from ..engine import FittedEngine

__all__ = ["EngineStore"]


class EngineStore:
    def __init__(self):
        self._engines: dict[str, FittedEngine] = {}
        self._lock = threading.Lock()

    def put(self, engine_id: str, engine: FittedEngine) -> None:
        """Insert once; re-inserting the same id is a no-op (ids are
        content-addressed, so the payload is identical by construction)."""
        with self._lock:
            self._engines.setdefault(engine_id, engine)

    def get(self, engine_id: str) -> FittedEngine | None:
        with self._lock:
            return self._engines.get(engine_id)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._engines)
