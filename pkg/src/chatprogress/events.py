"""Append-only session event log.

One JSONL file per session. Lines are serialized canonically (sorted keys,
compact separators) so identical event sequences are byte-identical, which
the replay tooling relies on.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

EVENT_SESSION_CREATED = "session-created"
EVENT_USER_MESSAGE = "user-message"
EVENT_AGENT_MESSAGE = "agent-message"
EVENT_SUBTASK_COMPLETED = "subtask-completed"
EVENT_GOAL_PROMPTED = "goal-prompted"
EVENT_MODAL_CHOICE = "modal-choice"
EVENT_SESSION_ENDED = "session-ended"

EVENT_KINDS = (
    EVENT_SESSION_CREATED,
    EVENT_USER_MESSAGE,
    EVENT_AGENT_MESSAGE,
    EVENT_SUBTASK_COMPLETED,
    EVENT_GOAL_PROMPTED,
    EVENT_MODAL_CHOICE,
    EVENT_SESSION_ENDED,
)

PROGRESS_EVENT_KINDS = (EVENT_SUBTASK_COMPLETED, EVENT_GOAL_PROMPTED)


class EventLogError(Exception):
    pass


@dataclass(frozen=True)
class SessionEvent:
    session_id: str
    sequence: int
    kind: str
    payload: Mapping[str, Any]
    timestamp_ms: int

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise EventLogError(f"unknown event kind {self.kind!r}")
        object.__setattr__(self, "payload", dict(self.payload))

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "sessionId": self.session_id,
                "sequence": self.sequence,
                "kind": self.kind,
                "payload": self.payload,
                "timestamp": self.timestamp_ms,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "SessionEvent":
        raw = json.loads(line)
        return cls(
            session_id=raw["sessionId"],
            sequence=raw["sequence"],
            kind=raw["kind"],
            payload=raw["payload"],
            timestamp_ms=raw["timestamp"],
        )


def serialize_events(events: Iterable[SessionEvent]) -> str:
    return "".join(event.to_json_line() + "\n" for event in events)


class EventStore:
    """Per-session JSONL files under a data directory; appends are atomic."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._sequences: dict[str, int] = {}

    def _path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.jsonl"

    def last_sequence(self, session_id: str) -> int:
        with self._lock:
            if session_id not in self._sequences:
                events = self.read(session_id)
                self._sequences[session_id] = events[-1].sequence if events else 0
            return self._sequences[session_id]

    def append(self, event: SessionEvent) -> None:
        with self._lock:
            expected = self.last_sequence(event.session_id) + 1
            if event.sequence != expected:
                raise EventLogError(
                    f"gap in event log for {event.session_id}: "
                    f"expected sequence {expected}, got {event.sequence}"
                )
            line = event.to_json_line() + "\n"
            with open(self._path(event.session_id), "a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()
            self._sequences[event.session_id] = event.sequence

    def read(self, session_id: str) -> list[SessionEvent]:
        path = self._path(session_id)
        if not path.exists():
            return []
        events = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    events.append(SessionEvent.from_json_line(line))
        return events

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.jsonl"))

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()
