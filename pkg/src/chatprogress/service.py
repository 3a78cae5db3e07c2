"""Session lifecycle and the turn pipeline.

Each user turn flows question -> task agent -> feedback judge -> progress
events. Sessions are persisted as append-only event logs from which live
state can always be rebuilt; many sessions may run concurrently but turns
within one session are strictly serialized.
"""

from __future__ import annotations

import hashlib
import json
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping

from . import engine, gateway
from .domain import (
    CONDITION_CONTROL,
    CONDITION_CPG,
    CONDITIONS,
    ROLE_TASK_AGENT,
    ROLE_USER,
    STATUS_ABANDONED,
    STATUS_ACTIVE,
    STATUS_COMPLETED,
    Message,
    ProgressState,
    SessionState,
    TaskDefinition,
    context_window,
    insert_marker,
    load_task_file,
    progress_payload,
    validate_task_definition,
)
from .engine import (
    CHOICE_CONTINUE,
    MODAL_DISMISSED_CONTINUE,
    MODAL_EXITED,
    MODAL_NONE,
    MODAL_PROMPTING,
    ModalState,
    RsaBinding,
    advance_modal,
)
from .events import (
    EVENT_AGENT_MESSAGE,
    EVENT_GOAL_PROMPTED,
    EVENT_MODAL_CHOICE,
    EVENT_SESSION_CREATED,
    EVENT_SESSION_ENDED,
    EVENT_SUBTASK_COMPLETED,
    EVENT_USER_MESSAGE,
    PROGRESS_EVENT_KINDS,
    EventStore,
    SessionEvent,
)

DEFAULT_SESSION_TIMEOUT_S = 3600

BUILTIN_TASKS_DIR = Path(__file__).parent / "assets" / "tasks"
GOLDEN_TRANSCRIPT = Path(__file__).parent / "assets" / "transcripts" / "golden-rsa.jsonl"
WALKTHROUGH_SCRIPT = Path(__file__).parent / "assets" / "scripts" / "rsa-walkthrough.json"


class ServiceError(Exception):
    pass


class UnknownTask(ServiceError):
    pass


class UnknownSession(ServiceError):
    pass


class SessionNotActive(ServiceError):
    pass


class ModalPending(ServiceError):
    """A completion prompt is showing; the turn is rejected, not queued."""


class InvalidTask(ServiceError):
    """A task definition failed validation at registration time."""


class MalformedTranscript(ValueError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"transcript line {line_number}: {reason}")
        self.line_number = line_number


# -- clocks -------------------------------------------------------------------

class SystemClock:
    def now_ms(self) -> int:
        return time.time_ns() // 1_000_000


class ManualClock:
    """Deterministic clock for tests and replay."""

    def __init__(self, start_ms: int = 0, step_ms: int = 0):
        self._now = start_ms
        self._step = step_ms

    def now_ms(self) -> int:
        now = self._now
        self._now += self._step
        return now

    def advance(self, delta_ms: int) -> None:
        self._now += delta_ms


# -- task registry ------------------------------------------------------------

class TaskRegistry:
    def __init__(self) -> None:
        self._tasks: dict[str, TaskDefinition] = {}

    def register(self, task_id: str, definition: TaskDefinition) -> None:
        result = validate_task_definition(definition)
        if not result.ok:
            details = "; ".join(f"{i.code}({i.field})" for i in result.issues)
            raise InvalidTask(f"task {task_id!r} rejected: {details}")
        self._tasks[task_id] = definition

    def load_file(self, path: str | Path, task_id: str | None = None) -> str:
        path = Path(path)
        task_id = task_id or path.stem
        self.register(task_id, load_task_file(path))
        return task_id

    def load_directory(self, directory: str | Path) -> list[str]:
        return [self.load_file(p) for p in sorted(Path(directory).glob("*.json"))]

    @classmethod
    def with_builtin(cls) -> "TaskRegistry":
        registry = cls()
        registry.load_directory(BUILTIN_TASKS_DIR)
        return registry

    def get(self, task_id: str) -> TaskDefinition:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise UnknownTask(f"no task registered with id {task_id!r}") from None

    def ids(self) -> list[str]:
        return sorted(self._tasks)


# -- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class SessionMetrics:
    session_id: str
    task_id: str
    condition: str
    task_time_s: float
    interaction_count: int
    completed: bool
    ended: bool
    per_subtask_completed_at_ms: Mapping[int, int]
    goal_reached_count: int


@dataclass(frozen=True)
class GroupSummary:
    condition: str | None
    sessions: int
    mean_task_time_s: float
    mean_interaction_count: float
    completion_rate: float


def metrics_from_events(events: list[SessionEvent]) -> SessionMetrics:
    """Session metrics computed from the event log only."""
    if not events or events[0].kind != EVENT_SESSION_CREATED:
        raise UnknownSession("event log does not start with session-created")
    created = events[0]
    started = created.timestamp_ms
    ended_at = None
    completed = False
    interactions = 0
    per_subtask: dict[int, int] = {}
    goal_reached = 0
    for event in events:
        if event.kind == EVENT_USER_MESSAGE:
            interactions += 1
        elif event.kind == EVENT_SUBTASK_COMPLETED:
            per_subtask.setdefault(event.payload["step"], event.timestamp_ms)
        elif event.kind == EVENT_GOAL_PROMPTED:
            goal_reached = event.payload["goalReachedCount"]
        elif event.kind == EVENT_SESSION_ENDED:
            ended_at = event.timestamp_ms
            completed = event.payload.get("status") == STATUS_COMPLETED
    measured_to = ended_at if ended_at is not None else events[-1].timestamp_ms
    return SessionMetrics(
        session_id=created.session_id,
        task_id=created.payload["taskId"],
        condition=created.payload["condition"],
        task_time_s=max(measured_to - started, 0) / 1000.0,
        interaction_count=interactions,
        completed=completed,
        ended=ended_at is not None,
        per_subtask_completed_at_ms=per_subtask,
        goal_reached_count=goal_reached,
    )


# -- event folding ------------------------------------------------------------

def rebuild_state(events: list[SessionEvent], task: TaskDefinition) -> SessionState:
    """Fold an event log back into the session state it produced."""
    if not events or events[0].kind != EVENT_SESSION_CREATED:
        raise UnknownSession("event log does not start with session-created")
    created = events[0]
    condition = created.payload["condition"]
    state = SessionState(
        session_id=created.session_id,
        condition=condition,
        task_id=created.payload["taskId"],
        progress=ProgressState.for_task(task),
        started_at_ms=created.timestamp_ms,
    )
    for event in events[1:]:
        if event.kind == EVENT_USER_MESSAGE:
            message = Message(ROLE_USER, event.payload["text"], event.payload["turnIndex"], event.timestamp_ms)
            state = replace(state, history=state.history + (message,))
        elif event.kind == EVENT_AGENT_MESSAGE:
            message = Message(ROLE_TASK_AGENT, event.payload["text"], event.payload["turnIndex"], event.timestamp_ms)
            state = replace(state, history=state.history + (message,))
        elif event.kind == EVENT_SUBTASK_COMPLETED:
            state = replace(state, progress=insert_marker(state.progress, event.payload["step"]))
        elif event.kind == EVENT_GOAL_PROMPTED:
            progress = replace(state.progress, goal_reached_count=event.payload["goalReachedCount"])
            phase = MODAL_PROMPTING if condition == CONDITION_CPG else MODAL_DISMISSED_CONTINUE
            state = replace(state, progress=progress, modal_phase=phase)
        elif event.kind == EVENT_MODAL_CHOICE:
            phase = MODAL_DISMISSED_CONTINUE if event.payload["choice"] == CHOICE_CONTINUE else MODAL_EXITED
            state = replace(state, modal_phase=phase)
        elif event.kind == EVENT_SESSION_ENDED:
            state = replace(state, status=event.payload["status"], ended_at_ms=event.timestamp_ms)
    return state


def rebuild_binding(events: list[SessionEvent], task: TaskDefinition) -> RsaBinding:
    """Recompute the RSA value binding by re-reading every exchange."""
    binding = RsaBinding()
    question: Message | None = None
    empty = ProgressState.for_task(task)
    for event in events:
        if event.kind == EVENT_USER_MESSAGE:
            question = Message(ROLE_USER, event.payload["text"], event.payload["turnIndex"], event.timestamp_ms)
        elif event.kind == EVENT_AGENT_MESSAGE and question is not None:
            answer = Message(ROLE_TASK_AGENT, event.payload["text"], event.payload["turnIndex"], event.timestamp_ms)
            binding = engine.run_evaluation(question, answer, task, empty, binding).binding
    return binding


# -- external payloads (condition opacity enforced here) ----------------------

def message_payload(message: Message) -> dict[str, Any]:
    return {
        "role": message.role,
        "text": message.text,
        "turnIndex": message.turn_index,
        "timestamp": message.timestamp_ms,
    }


def event_payload(event: SessionEvent) -> dict[str, Any]:
    return {
        "sessionId": event.session_id,
        "sequence": event.sequence,
        "kind": event.kind,
        "payload": dict(event.payload),
        "timestamp": event.timestamp_ms,
    }


def external_event(event: SessionEvent, condition: str) -> dict[str, Any] | None:
    """Event payload for clients; progress events vanish for control sessions."""
    if condition == CONDITION_CONTROL and event.kind in PROGRESS_EVENT_KINDS:
        return None
    return event_payload(event)


def session_payload(state: SessionState, task: TaskDefinition) -> dict[str, Any]:
    """Session state for clients; control sessions carry no progress data."""
    payload: dict[str, Any] = {
        "sessionId": state.session_id,
        "taskId": state.task_id,
        "condition": state.condition,
        "status": state.status,
        "goal": task.goal_label,
        "description": task.goal_description,
        "startedAt": state.started_at_ms,
        "endedAt": state.ended_at_ms,
        "interactionCount": state.interaction_count,
        "history": [message_payload(m) for m in state.history],
    }
    if state.condition == CONDITION_CPG:
        payload["progress"] = progress_payload(task, state.progress)
        payload["modal"] = {"phase": state.modal_phase}
    return payload


def metrics_payload(metrics: SessionMetrics) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "sessionId": metrics.session_id,
        "taskId": metrics.task_id,
        "condition": metrics.condition,
        "taskTimeS": metrics.task_time_s,
        "interactionCount": metrics.interaction_count,
        "completed": metrics.completed,
        "ended": metrics.ended,
    }
    if metrics.condition == CONDITION_CPG:
        payload["perSubtaskCompletedAt"] = {
            str(step): ts for step, ts in sorted(metrics.per_subtask_completed_at_ms.items())
        }
        payload["goalReachedCount"] = metrics.goal_reached_count
    return payload


# -- the service ---------------------------------------------------------------

@dataclass
class TurnResult:
    message: Message
    progress_events: list[SessionEvent]
    goal_prompted: bool


@dataclass
class _LiveSession:
    state: SessionState
    binding: RsaBinding
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionService:
    def __init__(
        self,
        tasks: TaskRegistry,
        store: EventStore,
        task_backend: Any,
        judge_backend: Any | None = None,
        clock: Any | None = None,
        session_timeout_s: int = DEFAULT_SESSION_TIMEOUT_S,
        id_factory: Callable[[], str] | None = None,
    ):
        self.tasks = tasks
        self.store = store
        self.task_backend = task_backend
        self.judge_backend = judge_backend or gateway.DeterministicJudge()
        self.clock = clock or SystemClock()
        self.session_timeout_s = session_timeout_s
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex[:12])
        self._live: dict[str, _LiveSession] = {}
        self._registry_lock = threading.Lock()
        self._subscribers: dict[str, list[queue.Queue]] = {}

    # -- event plumbing

    def _emit(self, live: _LiveSession, kind: str, payload: Mapping[str, Any]) -> SessionEvent:
        session_id = live.state.session_id
        event = SessionEvent(
            session_id=session_id,
            sequence=self.store.last_sequence(session_id) + 1,
            kind=kind,
            payload=payload,
            timestamp_ms=self.clock.now_ms(),
        )
        self.store.append(event)
        if external_event(event, live.state.condition) is not None:
            with self._registry_lock:
                subscribers = list(self._subscribers.get(session_id, []))
            for subscriber in subscribers:
                subscriber.put(event)
        return event

    def subscribe(self, session_id: str) -> queue.Queue:
        self._require_live(session_id)
        q: queue.Queue = queue.Queue()
        with self._registry_lock:
            self._subscribers.setdefault(session_id, []).append(q)
        return q

    def unsubscribe(self, session_id: str, q: queue.Queue) -> None:
        with self._registry_lock:
            subscribers = self._subscribers.get(session_id, [])
            if q in subscribers:
                subscribers.remove(q)

    # -- session access

    def _require_live(self, session_id: str) -> _LiveSession:
        with self._registry_lock:
            live = self._live.get(session_id)
        if live is not None:
            return live
        events = self.store.read(session_id)
        if not events:
            raise UnknownSession(f"no session with id {session_id!r}")
        task = self.tasks.get(events[0].payload["taskId"])
        state = rebuild_state(events, task)
        binding = RsaBinding()
        if getattr(self.judge_backend, "kind", None) in (None, "deterministic-rules"):
            binding = rebuild_binding(events, task)
        live = _LiveSession(state=state, binding=binding)
        with self._registry_lock:
            self._live.setdefault(session_id, live)
            return self._live[session_id]

    def _expire_if_idle(self, live: _LiveSession) -> None:
        state = live.state
        if state.status != STATUS_ACTIVE:
            return
        events = self.store.read(state.session_id)
        last_ts = events[-1].timestamp_ms if events else state.started_at_ms
        if self.clock.now_ms() - last_ts > self.session_timeout_s * 1000:
            event = self._emit(live, EVENT_SESSION_ENDED, {"status": STATUS_ABANDONED, "reason": "timeout"})
            live.state = replace(state, status=STATUS_ABANDONED, ended_at_ms=event.timestamp_ms)

    # -- operations

    def create_session(self, task_id: str, condition: str) -> SessionState:
        task = self.tasks.get(task_id)
        if condition not in CONDITIONS:
            raise ServiceError(f"condition must be one of {CONDITIONS}, got {condition!r}")
        session_id = self._id_factory()
        state = SessionState(
            session_id=session_id,
            condition=condition,
            task_id=task_id,
            progress=ProgressState.for_task(task),
            started_at_ms=self.clock.now_ms(),
        )
        live = _LiveSession(state=state, binding=RsaBinding())
        with self._registry_lock:
            self._live[session_id] = live
        event = self._emit(live, EVENT_SESSION_CREATED, {"taskId": task_id, "condition": condition})
        live.state = replace(state, started_at_ms=event.timestamp_ms)
        return live.state

    def get_session(self, session_id: str) -> SessionState:
        live = self._require_live(session_id)
        with live.lock:
            self._expire_if_idle(live)
            return live.state

    def _pending_question(self, state: SessionState) -> Message | None:
        if state.history and state.history[-1].role == ROLE_USER:
            return state.history[-1]
        return None

    def submit_turn(self, session_id: str, text: str) -> TurnResult:
        live = self._require_live(session_id)
        with live.lock:
            self._expire_if_idle(live)
            state = live.state
            if state.status != STATUS_ACTIVE:
                raise SessionNotActive(f"session {session_id} is {state.status}")
            if state.modal_phase == MODAL_PROMPTING:
                raise ModalPending("completion prompt must be answered before the next turn")
            task = self.tasks.get(state.task_id)

            pending = self._pending_question(state)
            if pending is not None and pending.text == text:
                # Retry of a turn whose agent call failed: reuse the persisted
                # question so the interaction is not double-counted.
                question = pending
                history_before = state.history[:-1]
            else:
                question = Message(ROLE_USER, text, state.next_turn_index, self.clock.now_ms())
                history_before = state.history
                event = self._emit(live, EVENT_USER_MESSAGE, {"text": text, "turnIndex": question.turn_index})
                question = replace(question, timestamp_ms=event.timestamp_ms)
                live.state = state = replace(state, history=history_before + (question,))

            answer = gateway.task_agent_reply(
                self.task_backend,
                context_window(list(history_before)),
                question,
                turn_index=question.turn_index + 1,
                now_ms=self.clock.now_ms(),
            )
            event = self._emit(live, EVENT_AGENT_MESSAGE, {"text": answer.text, "turnIndex": answer.turn_index})
            answer = replace(answer, timestamp_ms=event.timestamp_ms)
            state = replace(state, history=state.history + (answer,))

            outcome = engine.run_feedback_agent(
                self.judge_backend, question, answer, task, state.progress, live.binding
            )
            live.binding = outcome.binding
            progress = state.progress
            progress_events: list[SessionEvent] = []
            for step in sorted(outcome.verdict.newly_completed):
                progress = insert_marker(progress, step)
                progress_events.append(
                    self._emit(live, EVENT_SUBTASK_COMPLETED, {"step": step, "label": task.subtask(step).label})
                )

            modal = ModalState(state.modal_phase)
            goal_prompted = False
            if outcome.verdict.goal_complete and modal.phase in (MODAL_NONE, MODAL_DISMISSED_CONTINUE):
                modal = advance_modal(modal, outcome.verdict)
                goal_prompted = modal.phase == MODAL_PROMPTING
                progress = replace(progress, goal_reached_count=progress.goal_reached_count + 1)
                progress_events.append(
                    self._emit(live, EVENT_GOAL_PROMPTED, {"goalReachedCount": progress.goal_reached_count})
                )
                if state.condition == CONDITION_CONTROL:
                    # No modal window exists for control; progress keeps being
                    # tracked internally and the prompt is suppressed.
                    modal = ModalState(MODAL_DISMISSED_CONTINUE)
                    goal_prompted = False

            live.state = replace(state, progress=progress, modal_phase=modal.phase)
            external = [e for e in progress_events if external_event(e, state.condition) is not None]
            return TurnResult(message=answer, progress_events=external, goal_prompted=goal_prompted)

    def respond_modal(self, session_id: str, choice: str) -> SessionState:
        live = self._require_live(session_id)
        with live.lock:
            self._expire_if_idle(live)
            state = live.state
            if state.status != STATUS_ACTIVE:
                raise SessionNotActive(f"session {session_id} is {state.status}")
            modal = advance_modal(ModalState(state.modal_phase), user_choice=choice)
            self._emit(live, EVENT_MODAL_CHOICE, {"choice": choice})
            state = replace(state, modal_phase=modal.phase)
            if modal.phase == MODAL_EXITED:
                event = self._emit(live, EVENT_SESSION_ENDED, {"status": STATUS_COMPLETED, "reason": "modal-exit"})
                state = replace(state, status=STATUS_COMPLETED, ended_at_ms=event.timestamp_ms)
            live.state = state
            return state

    def end_session(self, session_id: str, status: str = STATUS_ABANDONED) -> SessionState:
        """Explicit end outside the modal flow (user quits, control completes)."""
        if status not in (STATUS_COMPLETED, STATUS_ABANDONED):
            raise ServiceError(f"cannot end a session with status {status!r}")
        live = self._require_live(session_id)
        with live.lock:
            state = live.state
            if state.status != STATUS_ACTIVE:
                raise SessionNotActive(f"session {session_id} is {state.status}")
            event = self._emit(live, EVENT_SESSION_ENDED, {"status": status, "reason": "explicit"})
            live.state = replace(state, status=status, ended_at_ms=event.timestamp_ms)
            return live.state

    # -- metrics and introspection

    def events(self, session_id: str, after_sequence: int = 0) -> list[SessionEvent]:
        events = self.store.read(session_id)
        if not events:
            raise UnknownSession(f"no session with id {session_id!r}")
        return [e for e in events if e.sequence > after_sequence]

    def metrics(self, session_id: str) -> SessionMetrics:
        events = self.store.read(session_id)
        if not events:
            raise UnknownSession(f"no session with id {session_id!r}")
        return metrics_from_events(events)

    def aggregate_metrics(
        self, condition: str | None = None, task_id: str | None = None
    ) -> GroupSummary:
        rows = []
        for session_id in self.store.session_ids():
            metrics = metrics_from_events(self.store.read(session_id))
            if condition is not None and metrics.condition != condition:
                continue
            if task_id is not None and metrics.task_id != task_id:
                continue
            rows.append(metrics)
        if not rows:
            return GroupSummary(condition, 0, 0.0, 0.0, 0.0)
        return GroupSummary(
            condition=condition,
            sessions=len(rows),
            mean_task_time_s=sum(m.task_time_s for m in rows) / len(rows),
            mean_interaction_count=sum(m.interaction_count for m in rows) / len(rows),
            completion_rate=sum(1 for m in rows if m.completed) / len(rows),
        )

    def rebuild_session(self, session_id: str) -> SessionState:
        events = self.store.read(session_id)
        if not events:
            raise UnknownSession(f"no session with id {session_id!r}")
        return rebuild_state(events, self.tasks.get(events[0].payload["taskId"]))


# -- offline replay -------------------------------------------------------------

@dataclass(frozen=True)
class ReplayResult:
    session_id: str
    events: tuple[SessionEvent, ...]
    timeline: tuple[SessionEvent, ...]
    final_state: SessionState

    def serialize(self) -> str:
        return "".join(e.to_json_line() + "\n" for e in self.events)


def read_transcript(path: str | Path) -> list[Message]:
    """Parse the documented transcript JSONL: one {role, text} per line."""
    messages: list[Message] = []
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedTranscript(line_number, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(raw, dict) or "role" not in raw or "text" not in raw:
                raise MalformedTranscript(line_number, "each line needs 'role' and 'text'")
            role = raw["role"]
            if role not in (ROLE_USER, ROLE_TASK_AGENT):
                raise MalformedTranscript(line_number, f"unknown role {role!r}")
            if not isinstance(raw["text"], str):
                raise MalformedTranscript(line_number, "'text' must be a string")
            messages.append(
                Message(role, raw["text"], len(messages), 1000 * (len(messages) + 1))
            )
    return messages


def replay_transcript(
    transcript: str | Path, task: TaskDefinition, task_id: str = "replay-task"
) -> ReplayResult:
    """Run the deterministic pipeline over a recorded transcript.

    Agent backends are bypassed: answers come from the transcript. The
    completion prompt is auto-dismissed so evaluation continues to the end.
    Output is byte-identical across runs for the same inputs.
    """
    transcript = Path(transcript)
    messages = read_transcript(transcript)
    digest = hashlib.sha256(
        task_id.encode() + b"\0" + transcript.read_bytes()
    ).hexdigest()[:12]
    session_id = f"replay-{digest}"

    sequence = 0
    events: list[SessionEvent] = []

    def emit(kind: str, payload: Mapping[str, Any], timestamp_ms: int) -> SessionEvent:
        nonlocal sequence
        sequence += 1
        event = SessionEvent(session_id, sequence, kind, payload, timestamp_ms)
        events.append(event)
        return event

    emit(EVENT_SESSION_CREATED, {"taskId": task_id, "condition": CONDITION_CPG}, 0)
    progress = ProgressState.for_task(task)
    binding = RsaBinding()
    modal = ModalState()
    question: Message | None = None
    for message in messages:
        if message.role == ROLE_USER:
            emit(EVENT_USER_MESSAGE, {"text": message.text, "turnIndex": message.turn_index}, message.timestamp_ms)
            question = message
            continue
        emit(EVENT_AGENT_MESSAGE, {"text": message.text, "turnIndex": message.turn_index}, message.timestamp_ms)
        if question is None:
            continue
        outcome = engine.run_evaluation(question, message, task, progress, binding)
        binding = outcome.binding
        for step in sorted(outcome.verdict.newly_completed):
            progress = insert_marker(progress, step)
            emit(
                EVENT_SUBTASK_COMPLETED,
                {"step": step, "label": task.subtask(step).label},
                message.timestamp_ms,
            )
        if outcome.verdict.goal_complete and modal.phase in (MODAL_NONE, MODAL_DISMISSED_CONTINUE):
            modal = advance_modal(modal, outcome.verdict)
            progress = replace(progress, goal_reached_count=progress.goal_reached_count + 1)
            emit(
                EVENT_GOAL_PROMPTED,
                {"goalReachedCount": progress.goal_reached_count},
                message.timestamp_ms,
            )
            # Offline harness: keep evaluating subsequent exchanges.
            modal = advance_modal(modal, user_choice=CHOICE_CONTINUE)

    final = rebuild_state(events, task)
    timeline = tuple(e for e in events if e.kind in PROGRESS_EVENT_KINDS)
    return ReplayResult(session_id, tuple(events), timeline, final)
