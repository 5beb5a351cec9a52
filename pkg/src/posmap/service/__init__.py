"""HTTP face of the package: a FastAPI app over posmap.analysis."""

from .app import create_app

__all__ = ["create_app"]
