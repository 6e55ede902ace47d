from .app import create_app
from .store import EngineStore

__all__ = ["create_app", "EngineStore"]
