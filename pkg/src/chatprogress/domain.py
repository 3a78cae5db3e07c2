"""Shared domain types and the progress state machine.

Everything here is an immutable value: state changes produce new values,
so instances are safe to share across threads. Serialized task definitions
use a versioned JSON document (``schemaVersion`` "1").
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, Mapping, Sequence

from .rules import RuleSet, rule_set_from_dict, rule_set_to_dict

ROLE_USER = "user"
ROLE_TASK_AGENT = "task-agent"
ROLE_SYSTEM = "system"
ROLES = (ROLE_USER, ROLE_TASK_AGENT, ROLE_SYSTEM)
Role = Literal["user", "task-agent", "system"]

CONDITION_CONTROL = "control"
CONDITION_CPG = "cpg"
CONDITIONS = (CONDITION_CONTROL, CONDITION_CPG)

STATUS_ACTIVE = "active"
STATUS_COMPLETED = "completed"
STATUS_ABANDONED = "abandoned"

MIN_SUBTASKS = 3
MAX_SUBTASKS = 7

# Most recent messages handed to the task agent: five question-answer pairs.
CONTEXT_WINDOW_SIZE = 10

TASK_SCHEMA_VERSION = "1"


class ProgressError(Exception):
    """Base class for progress state machine violations."""


class DuplicateStep(ProgressError):
    """A step was inserted twice; signals an evaluation bug upstream."""


class UnknownStep(ProgressError):
    """The step does not belong to the task definition."""


class TaskFormatError(ValueError):
    """A task definition document does not match the documented schema."""


@dataclass(frozen=True)
class Message:
    """One chat message. ``turn_index`` strictly increases within a session."""

    role: Role
    text: str
    turn_index: int
    timestamp_ms: int


def context_window(history: Sequence[Message]) -> list[Message]:
    """Return the most recent messages, oldest first, capped at the window size."""
    return list(history[-CONTEXT_WINDOW_SIZE:])


@dataclass(frozen=True)
class Subtask:
    step: int
    label: str
    rules: RuleSet
    active: bool = False


@dataclass(frozen=True)
class TaskDefinition:
    """A goal plus ordered subtasks and a task-wide relevance rule."""

    goal_label: str
    goal_description: str
    subtasks: tuple[Subtask, ...]
    fundamental_rule: RuleSet

    @property
    def steps(self) -> frozenset[int]:
        return frozenset(s.step for s in self.subtasks)

    def subtask(self, step: int) -> Subtask:
        for sub in self.subtasks:
            if sub.step == step:
                return sub
        raise UnknownStep(f"step {step} is not part of task {self.goal_label!r}")


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    field: str
    message: str


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    issues: tuple[ValidationIssue, ...] = ()

    def codes(self) -> set[str]:
        return {issue.code for issue in self.issues}


def validate_task_definition(definition: TaskDefinition) -> ValidationResult:
    """Accept a definition iff the subtask count, steps, and rules are sound."""
    issues: list[ValidationIssue] = []
    count = len(definition.subtasks)
    if count < MIN_SUBTASKS:
        issues.append(
            ValidationIssue(
                "TooFewSubtasks",
                "subtasks",
                f"{count} subtasks; at least {MIN_SUBTASKS} required",
            )
        )
    elif count > MAX_SUBTASKS:
        issues.append(
            ValidationIssue(
                "TooManySubtasks",
                "subtasks",
                f"{count} subtasks; at most {MAX_SUBTASKS} allowed",
            )
        )
    steps = [s.step for s in definition.subtasks]
    if sorted(steps) != list(range(1, count + 1)):
        issues.append(
            ValidationIssue(
                "NonContiguousSteps",
                "subtasks.step",
                f"steps {steps} must be unique and contiguous from 1 to {count}",
            )
        )
    for index, sub in enumerate(definition.subtasks):
        if not sub.rules.checks:
            issues.append(
                ValidationIssue(
                    "EmptyRuleSet",
                    f"subtasks[{index}].rules",
                    f"subtask {sub.step} ({sub.label!r}) has no checks",
                )
            )
    return ValidationResult(ok=not issues, issues=tuple(issues))


@dataclass(frozen=True)
class ProgressState:
    """Completed-step set for one session run.

    ``display_order`` and ``goal_marker_active`` are derived, so the
    rendering invariants (ascending order, markers only for completed
    steps, goal marker active exactly on full completion) hold by
    construction.
    """

    all_steps: frozenset[int]
    completed_steps: frozenset[int] = frozenset()
    goal_reached_count: int = 0

    @classmethod
    def for_task(cls, task: TaskDefinition) -> "ProgressState":
        return cls(all_steps=task.steps)

    @property
    def display_order(self) -> tuple[int, ...]:
        return tuple(sorted(self.completed_steps))

    @property
    def goal_marker_active(self) -> bool:
        return self.completed_steps == self.all_steps


def insert_marker(progress: ProgressState, step: int) -> ProgressState:
    """Record a newly completed step; the marker lands at its sorted position."""
    if step not in progress.all_steps:
        raise UnknownStep(f"step {step} is not part of this task")
    if step in progress.completed_steps:
        raise DuplicateStep(f"step {step} already completed")
    return replace(progress, completed_steps=progress.completed_steps | {step})


def progress_payload(task: TaskDefinition, progress: ProgressState) -> dict[str, Any]:
    """Display payload: labels appear only for completed subtasks."""
    return {
        "completedSteps": sorted(progress.completed_steps),
        "displayOrder": list(progress.display_order),
        "markers": [
            {"step": step, "label": task.subtask(step).label, "active": True}
            for step in progress.display_order
        ],
        "goalMarker": {"label": task.goal_label, "active": progress.goal_marker_active},
        "goalReachedCount": progress.goal_reached_count,
    }


@dataclass(frozen=True)
class SessionState:
    """Full state of one conversation session."""

    session_id: str
    condition: str
    task_id: str
    history: tuple[Message, ...] = ()
    progress: ProgressState = field(default_factory=lambda: ProgressState(frozenset()))
    started_at_ms: int = 0
    ended_at_ms: int | None = None
    status: str = STATUS_ACTIVE
    modal_phase: str = "none"

    @property
    def interaction_count(self) -> int:
        """Number of user questions asked so far."""
        return sum(1 for m in self.history if m.role == ROLE_USER)

    @property
    def next_turn_index(self) -> int:
        return self.history[-1].turn_index + 1 if self.history else 0


# -- task definition document I/O -------------------------------------------

def task_from_dict(raw: Mapping[str, Any]) -> TaskDefinition:
    if not isinstance(raw, Mapping):
        raise TaskFormatError("task document must be a JSON object")
    version = raw.get("schemaVersion")
    if version != TASK_SCHEMA_VERSION:
        raise TaskFormatError(f"unsupported schemaVersion {version!r}")
    for key in ("goal", "description", "subtasks", "fundamentalRule"):
        if key not in raw:
            raise TaskFormatError(f"missing field {key!r}")
    subtasks = []
    for entry in raw["subtasks"]:
        try:
            subtasks.append(
                Subtask(
                    step=int(entry["step"]),
                    label=str(entry["label"]),
                    rules=rule_set_from_dict(entry["rules"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise TaskFormatError(f"bad subtask entry: {exc}") from exc
    return TaskDefinition(
        goal_label=str(raw["goal"]),
        goal_description=str(raw["description"]),
        subtasks=tuple(subtasks),
        fundamental_rule=rule_set_from_dict(raw["fundamentalRule"]),
    )


def task_to_dict(task: TaskDefinition) -> dict[str, Any]:
    return {
        "schemaVersion": TASK_SCHEMA_VERSION,
        "goal": task.goal_label,
        "description": task.goal_description,
        "subtasks": [
            {"step": s.step, "label": s.label, "rules": rule_set_to_dict(s.rules)}
            for s in task.subtasks
        ],
        "fundamentalRule": rule_set_to_dict(task.fundamental_rule),
    }


def load_task_file(path: str | Path) -> TaskDefinition:
    with open(path, encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise TaskFormatError(f"{path}: {exc}") from exc
    return task_from_dict(raw)
