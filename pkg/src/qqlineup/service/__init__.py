"""HTTP service hosting lineups for human evaluation."""

from .app import create_app

__all__ = ["create_app"]
