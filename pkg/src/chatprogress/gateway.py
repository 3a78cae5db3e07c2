"""Pluggable backends for the task agent and the feedback judge.

The remote backend speaks the de-facto chat-completion JSON shape (a
``messages`` array of ``{role, content}`` objects) so any provider can be
adapted by pointing the endpoint at it. Scripted backends replay canned
dialogues, which keeps the whole test suite offline.
"""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import httpx

from . import engine
from .domain import ROLE_SYSTEM, ROLE_TASK_AGENT, ROLE_USER, Message, ProgressState, TaskDefinition
from .engine import MalformedVerdict

log = logging.getLogger(__name__)

_ASSETS = Path(__file__).parent / "assets"
JUDGE_PROMPT_PATH = _ASSETS / "judge_prompt_v1.txt"

WILDCARD = "*"

# chat-completion wire roles
_WIRE_ROLES = {ROLE_USER: "user", ROLE_TASK_AGENT: "assistant", ROLE_SYSTEM: "system"}


class BackendError(Exception):
    pass


class RemoteError(BackendError):
    pass


class Timeout(BackendError):
    pass


class ScriptExhausted(BackendError):
    """No script entry matched; impossible when the trailing wildcard holds."""


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TaskBackendConfig:
    kind: str  # "remote" | "scripted"
    endpoint: str | None = None
    api_key_env: str | None = None
    script_path: str | None = None
    model: str = ""
    timeout_s: float = 30.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.kind == "remote":
            if not self.endpoint or not self.api_key_env:
                raise ConfigError("remote backend needs endpoint and api_key_env")
        elif self.kind == "scripted":
            if not self.script_path or not Path(self.script_path).is_file():
                raise ConfigError(f"scripted backend needs an existing script file, got {self.script_path!r}")
        else:
            raise ConfigError(f"unknown backend kind {self.kind!r}")


@dataclass(frozen=True)
class ScriptEntry:
    match: str
    reply: str


@dataclass(frozen=True)
class ScriptedDialogue:
    """First-match-wins reply table; the last entry must be a wildcard."""

    entries: tuple[ScriptEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries or self.entries[-1].match != WILDCARD:
            raise ConfigError("scripted dialogue must end with a wildcard entry")

    @classmethod
    def from_list(cls, raw: Sequence[Mapping[str, str]]) -> "ScriptedDialogue":
        return cls(tuple(ScriptEntry(e["match"], e["reply"]) for e in raw))

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedDialogue":
        with open(path, encoding="utf-8") as handle:
            return cls.from_list(json.load(handle))

    def reply_to(self, text: str) -> str:
        lowered = text.lower()
        for entry in self.entries:
            if entry.match == WILDCARD or entry.match.lower() in lowered:
                return entry.reply
        raise ScriptExhausted(f"no script entry matched {text!r}")


class ScriptedTaskBackend:
    kind = "scripted"

    def __init__(self, dialogue: ScriptedDialogue):
        self.dialogue = dialogue

    @classmethod
    def from_config(cls, config: TaskBackendConfig) -> "ScriptedTaskBackend":
        return cls(ScriptedDialogue.from_file(config.script_path))

    def reply(self, context: Sequence[Message], question: Message) -> str:
        return self.dialogue.reply_to(question.text)


class RemoteChatBackend:
    """Chat-completion client with bounded, jittered, deadline-aware retries.

    The total worst-case latency is capped at timeout_s * (max_retries + 1):
    backoff sleeps and each attempt draw from the same deadline budget.
    """

    kind = "remote"

    def __init__(
        self,
        config: TaskBackendConfig,
        transport: httpx.BaseTransport | None = None,
        env: Mapping[str, str] | None = None,
    ):
        import os

        self.config = config
        self._env = env if env is not None else os.environ
        self._client = httpx.Client(transport=transport, timeout=config.timeout_s)
        self.latencies: list[float] = []

    def _headers(self) -> dict[str, str]:
        key = self._env.get(self.config.api_key_env or "", "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _complete(self, messages: list[dict[str, str]]) -> str:
        deadline = time.monotonic() + self.config.timeout_s * (self.config.max_retries + 1)
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            budget = deadline - time.monotonic()
            if budget <= 0:
                break
            started = time.monotonic()
            try:
                response = self._client.post(
                    self.config.endpoint,
                    json={"model": self.config.model, "messages": messages},
                    headers=self._headers(),
                    timeout=min(self.config.timeout_s, budget),
                )
                self.latencies.append(time.monotonic() - started)
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                self.latencies.append(time.monotonic() - started)
                last_error = Timeout(f"attempt {attempt + 1}: {exc}")
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                self.latencies.append(time.monotonic() - started)
                last_error = RemoteError(f"attempt {attempt + 1}: {exc}")
            if attempt < self.config.max_retries:
                pause = min(0.25 * 2**attempt * random.uniform(0.5, 1.0), max(deadline - time.monotonic(), 0))
                if pause > 0:
                    time.sleep(pause)
        if isinstance(last_error, BackendError):
            raise last_error
        raise RemoteError(f"no attempts completed: {last_error}")

    def reply(self, context: Sequence[Message], question: Message) -> str:
        messages = [
            {"role": _WIRE_ROLES[m.role], "content": m.text} for m in context
        ]
        messages.append({"role": "user", "content": question.text})
        return self._complete(messages)


def build_task_backend(config: TaskBackendConfig, transport=None):
    if config.kind == "scripted":
        return ScriptedTaskBackend.from_config(config)
    return RemoteChatBackend(config, transport=transport)


def task_agent_reply(
    backend: Any,
    context: Sequence[Message],
    question: Message,
    turn_index: int | None = None,
    now_ms: int | None = None,
) -> Message:
    """Ask the task agent for a reply; failures surface, never fabricated text."""
    text = backend.reply(context, question)
    return Message(
        role=ROLE_TASK_AGENT,
        text=text,
        turn_index=question.turn_index + 1 if turn_index is None else turn_index,
        timestamp_ms=question.timestamp_ms if now_ms is None else now_ms,
    )


# -- feedback judge backends -------------------------------------------------

class DeterministicJudge:
    """Marker backend: the engine evaluates the exchange with its own rules."""

    kind = "deterministic-rules"


def load_judge_prompt() -> str:
    return JUDGE_PROMPT_PATH.read_text(encoding="utf-8")


def fill_judge_prompt(template: str, question: Message, answer: Message, task: TaskDefinition) -> str:
    subtask_lines = "\n".join(f"{s.step}. {s.label}" for s in task.subtasks)
    return (
        template.replace("{goal}", task.goal_label)
        .replace("{subtasks}", subtask_lines)
        .replace("{question}", question.text)
        .replace("{answer}", answer.text)
    )


class RemoteJudge:
    kind = "remote-llm"

    def __init__(
        self,
        config: TaskBackendConfig,
        transport: httpx.BaseTransport | None = None,
        prompt_template: str | None = None,
    ):
        self._backend = RemoteChatBackend(config, transport=transport)
        self._template = prompt_template if prompt_template is not None else load_judge_prompt()

    @property
    def latencies(self) -> list[float]:
        return self._backend.latencies

    def raw_verdict(
        self,
        question: Message,
        answer: Message,
        task: TaskDefinition,
        progress: ProgressState,
    ) -> Mapping[str, Any]:
        prompt = fill_judge_prompt(self._template, question, answer, task)
        content = self._backend._complete([{"role": "user", "content": prompt}])
        return parse_judge_reply(content)


def parse_judge_reply(content: str) -> Mapping[str, Any]:
    """Parse the judge's JSON object reply; prose raises MalformedVerdict."""
    text = content.strip()
    if text.startswith("```"):
        text = text.strip("`")
        if text.startswith("json"):
            text = text[4:]
        text = text.strip()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedVerdict(f"judge reply is not JSON: {content!r}") from exc
    if not isinstance(raw, dict):
        raise MalformedVerdict(f"judge reply is not an object: {content!r}")
    return raw


def feedback_agent_judge(
    backend: Any,
    question: Message,
    answer: Message,
    task: TaskDefinition,
    progress: ProgressState,
    binding: engine.RsaBinding | None = None,
) -> Mapping[str, Any]:
    """Raw structured verdict from either judge kind.

    The deterministic kind delegates to the rule engine; the remote kind
    sends the filled prompt template and parses the JSON reply.
    """
    if getattr(backend, "kind", None) in (None, "deterministic-rules"):
        verdict = engine.evaluate_exchange(question, answer, task, progress, binding)
        return {
            "relevant": verdict.relevant,
            "completedSteps": sorted(verdict.newly_completed),
        }
    return backend.raw_verdict(question, answer, task, progress)
