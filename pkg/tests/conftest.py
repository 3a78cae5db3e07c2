import itertools
import socket

import pytest

from chatprogress.domain import ROLE_USER
from chatprogress.events import EventStore
from chatprogress.gateway import DeterministicJudge, ScriptedDialogue, ScriptedTaskBackend
from chatprogress.service import (
    GOLDEN_TRANSCRIPT,
    WALKTHROUGH_SCRIPT,
    ManualClock,
    SessionService,
    TaskRegistry,
    read_transcript,
)


@pytest.fixture(autouse=True)
def forbid_network(monkeypatch):
    """The whole suite must run offline: any socket dial is a failure."""

    def guard(self, *args, **kwargs):
        raise RuntimeError(f"network dial attempted during offline test run: {args}")

    monkeypatch.setattr(socket.socket, "connect", guard)
    yield


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {status}: {report.nodeid.split('::')[-1]}")


@pytest.fixture(scope="session")
def rsa_task():
    return TaskRegistry.with_builtin().get("rsa-encryption")


@pytest.fixture
def registry():
    return TaskRegistry.with_builtin()


@pytest.fixture(scope="session")
def golden_questions():
    return [m.text for m in read_transcript(GOLDEN_TRANSCRIPT) if m.role == ROLE_USER]


def build_service(tmp_path, clock=None, task_backend=None, judge_backend=None, timeout_s=3600):
    counter = itertools.count(1)
    return SessionService(
        tasks=TaskRegistry.with_builtin(),
        store=EventStore(tmp_path / "data"),
        task_backend=task_backend or ScriptedTaskBackend(ScriptedDialogue.from_file(WALKTHROUGH_SCRIPT)),
        judge_backend=judge_backend or DeterministicJudge(),
        clock=clock or ManualClock(start_ms=1_000_000, step_ms=1000),
        session_timeout_s=timeout_s,
        id_factory=lambda: f"s{next(counter):04d}",
    )


@pytest.fixture
def scripted_service(tmp_path):
    return build_service(tmp_path)
