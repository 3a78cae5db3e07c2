import json
import time

import httpx
import pytest

from chatprogress import gateway
from chatprogress.domain import ROLE_TASK_AGENT, Message, ProgressState
from chatprogress.engine import MalformedVerdict, evaluate_exchange
from chatprogress.gateway import (
    ConfigError,
    RemoteChatBackend,
    RemoteError,
    RemoteJudge,
    ScriptedDialogue,
    ScriptedTaskBackend,
    TaskBackendConfig,
    Timeout,
    feedback_agent_judge,
    fill_judge_prompt,
    parse_judge_reply,
    task_agent_reply,
)
from chatprogress.service import WALKTHROUGH_SCRIPT


def question(text, idx=0):
    return Message("user", text, idx, idx * 1000)


def remote_config(**overrides):
    defaults = dict(
        kind="remote",
        endpoint="https://chat.example.test/v1/chat/completions",
        api_key_env="CHAT_API_KEY",
        model="test-model",
        timeout_s=0.5,
        max_retries=2,
    )
    defaults.update(overrides)
    return TaskBackendConfig(**defaults)


def completion_transport(content, recorder=None):
    def handler(request):
        if recorder is not None:
            recorder.append(request)
        return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})

    return httpx.MockTransport(handler)


# -- scripted dialogue ----------------------------------------------------------

def test_scripted_dialogue_first_match_wins():
    dialogue = ScriptedDialogue.from_list(
        [
            {"match": "alpha", "reply": "first"},
            {"match": "alp", "reply": "second"},
            {"match": "*", "reply": "fallback"},
        ]
    )
    assert dialogue.reply_to("the alpha question") == "first"
    assert dialogue.reply_to("alpine") == "second"
    assert dialogue.reply_to("unmatched") == "fallback"


def test_scripted_dialogue_requires_trailing_wildcard():
    with pytest.raises(ConfigError):
        ScriptedDialogue.from_list([{"match": "a", "reply": "b"}])


def test_walkthrough_script_answers_multiplication_question():
    dialogue = ScriptedDialogue.from_file(WALKTHROUGH_SCRIPT)
    reply = dialogue.reply_to("Please multiply 61 by 53 for me")
    assert "3233" in reply


def test_task_agent_reply_builds_agent_message():
    backend = ScriptedTaskBackend(ScriptedDialogue.from_file(WALKTHROUGH_SCRIPT))
    q = question("How does RSA work?", idx=4)
    reply = task_agent_reply(backend, [], q, turn_index=5, now_ms=123)
    assert reply.role == ROLE_TASK_AGENT
    assert reply.turn_index == 5
    assert reply.timestamp_ms == 123
    assert "public key" in reply.text


def test_task_agent_reply_works_with_empty_context():
    backend = ScriptedTaskBackend(ScriptedDialogue.from_file(WALKTHROUGH_SCRIPT))
    reply = task_agent_reply(backend, [], question("hello there"))
    assert reply.text


# -- backend config --------------------------------------------------------------

def test_remote_config_requires_endpoint_and_key_env():
    with pytest.raises(ConfigError):
        TaskBackendConfig(kind="remote", endpoint=None, api_key_env="K")
    with pytest.raises(ConfigError):
        TaskBackendConfig(kind="remote", endpoint="https://x", api_key_env=None)


def test_scripted_config_requires_existing_file(tmp_path):
    with pytest.raises(ConfigError):
        TaskBackendConfig(kind="scripted", script_path=str(tmp_path / "missing.json"))


def test_unknown_backend_kind_rejected():
    with pytest.raises(ConfigError):
        TaskBackendConfig(kind="telepathy")


# -- remote backend ---------------------------------------------------------------

def test_remote_backend_parses_completion_and_sends_key():
    requests = []
    backend = RemoteChatBackend(
        remote_config(),
        transport=completion_transport("the answer", recorder=requests),
        env={"CHAT_API_KEY": "sekrit"},
    )
    context = [
        Message("user", "earlier question", 0, 0),
        Message("task-agent", "earlier answer", 1, 1),
    ]
    text = backend.reply(context, question("now?", idx=2))
    assert text == "the answer"
    sent = json.loads(requests[0].content)
    assert sent["model"] == "test-model"
    assert [m["role"] for m in sent["messages"]] == ["user", "assistant", "user"]
    assert requests[0].headers["authorization"] == "Bearer sekrit"
    assert len(backend.latencies) == 1


def test_remote_backend_retries_then_raises_remote_error():
    attempts = []

    def handler(request):
        attempts.append(request)
        raise httpx.ConnectError("unreachable")

    backend = RemoteChatBackend(
        remote_config(max_retries=2), transport=httpx.MockTransport(handler), env={}
    )
    with pytest.raises(RemoteError):
        backend.reply([], question("q"))
    assert len(attempts) == 3  # initial try plus two retries
    assert len(backend.latencies) == 3


def test_remote_backend_timeout_classified():
    def handler(request):
        raise httpx.ReadTimeout("too slow")

    backend = RemoteChatBackend(
        remote_config(max_retries=0), transport=httpx.MockTransport(handler), env={}
    )
    with pytest.raises(Timeout):
        backend.reply([], question("q"))


def test_remote_backend_total_latency_bounded():
    def handler(request):
        raise httpx.ConnectError("nope")

    config = remote_config(timeout_s=0.2, max_retries=2)
    backend = RemoteChatBackend(config, transport=httpx.MockTransport(handler), env={})
    started = time.monotonic()
    with pytest.raises(RemoteError):
        backend.reply([], question("q"))
    elapsed = time.monotonic() - started
    assert elapsed <= config.timeout_s * (config.max_retries + 1) + 0.1


def test_remote_backend_http_error_status_is_remote_error():
    transport = httpx.MockTransport(lambda request: httpx.Response(500, text="boom"))
    backend = RemoteChatBackend(remote_config(max_retries=0), transport=transport, env={})
    with pytest.raises(RemoteError):
        backend.reply([], question("q"))


# -- judge ------------------------------------------------------------------------

def test_parse_judge_reply_accepts_plain_and_fenced_json():
    assert parse_judge_reply('{"relevant": true, "completedSteps": [2]}') == {
        "relevant": True,
        "completedSteps": [2],
    }
    fenced = "```json\n{\"relevant\": false, \"completedSteps\": []}\n```"
    assert parse_judge_reply(fenced)["relevant"] is False


def test_parse_judge_reply_rejects_prose():
    with pytest.raises(MalformedVerdict):
        parse_judge_reply("The user has clearly completed step two.")
    with pytest.raises(MalformedVerdict):
        parse_judge_reply("[1, 2, 3]")


def test_remote_judge_round_trip(rsa_task):
    transport = completion_transport('{"relevant": true, "completedSteps": [2]}')
    judge = RemoteJudge(remote_config(), transport=transport)
    raw = judge.raw_verdict(
        question("multiply"), question("done"), rsa_task, ProgressState.for_task(rsa_task)
    )
    assert raw == {"relevant": True, "completedSteps": [2]}


def test_remote_judge_prompt_contains_subtasks_and_exchange(rsa_task):
    q = question("What is 61 times 53?")
    a = Message("task-agent", "It is 3233.", 1, 1)
    filled = fill_judge_prompt(gateway.load_judge_prompt(), q, a, rsa_task)
    assert "RSA Encryption" in filled
    assert "2. Multiplication of Primes" in filled
    assert "What is 61 times 53?" in filled
    assert "It is 3233." in filled


def test_feedback_agent_judge_deterministic_delegates(rsa_task):
    q = question("Multiply the primes 61 and 53.")
    a = Message("task-agent", "61 * 53 = 3233.", 1, 1)
    progress = ProgressState.for_task(rsa_task)
    raw = feedback_agent_judge(gateway.DeterministicJudge(), q, a, rsa_task, progress)
    verdict = evaluate_exchange(q, a, rsa_task, progress)
    assert raw == {"relevant": verdict.relevant, "completedSteps": sorted(verdict.newly_completed)}
