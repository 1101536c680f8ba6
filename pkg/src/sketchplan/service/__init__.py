"""Session-oriented facade over the planning pipeline."""

from .sessions import ServiceError, Session, SessionStore

__all__ = ["ServiceError", "Session", "SessionStore"]
