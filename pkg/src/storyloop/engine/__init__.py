"""Episode lifecycle: trace persistence, the turn pipeline, and the HTTP API."""

from .session import EpisodeSession, SessionManager
from .trace import TraceWriter, read_trace, trace_hash

__all__ = ["EpisodeSession", "SessionManager", "TraceWriter", "read_trace", "trace_hash"]
