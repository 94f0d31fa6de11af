"""Session persistence, CLI, and the review HTTP API."""

from .store import SCHEMA_VERSION, GradingSession, SessionStore

__all__ = ["SCHEMA_VERSION", "GradingSession", "SessionStore"]
