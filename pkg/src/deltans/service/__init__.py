"""HTTP service layer: pydantic schemas, pure handlers, FastAPI app."""

from .app import create_app

__all__ = ["create_app"]
