"""Conversational task sessions with visual progress feedback.

A task agent answers user turns while a feedback judge evaluates every
question-answer exchange against declarative subtask rules and advances a
progress bar of completion markers. Ships with a deterministic RSA task
pack, an event-sourced session service, replay tooling, and study
analytics.
"""

from .domain import (
    Message,
    ProgressState,
    SessionState,
    Subtask,
    TaskDefinition,
    context_window,
    insert_marker,
    validate_task_definition,
)
from .engine import (
    EvaluationVerdict,
    ModalState,
    RsaBinding,
    advance_modal,
    evaluate_exchange,
    extract_numbers,
    run_feedback_agent,
)
from .service import SessionService, TaskRegistry, replay_transcript

__version__ = "0.1.0"

__all__ = [
    "Message",
    "ProgressState",
    "SessionState",
    "Subtask",
    "TaskDefinition",
    "context_window",
    "insert_marker",
    "validate_task_definition",
    "EvaluationVerdict",
    "ModalState",
    "RsaBinding",
    "advance_modal",
    "evaluate_exchange",
    "extract_numbers",
    "run_feedback_agent",
    "SessionService",
    "TaskRegistry",
    "replay_transcript",
    "__version__",
]
