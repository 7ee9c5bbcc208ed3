from .app import create_app
from .rendering import render_crop, render_overlay
from .store import ConflictError, Decision, TaskState, VerificationStore

__all__ = [
    "ConflictError",
    "Decision",
    "TaskState",
    "VerificationStore",
    "create_app",
    "render_crop",
    "render_overlay",
]
