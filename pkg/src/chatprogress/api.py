"""HTTP JSON API over the session service.

Routes mirror the service operations one-to-one; condition opacity is
already enforced by the payload helpers in the service module. The event
stream is server-sent events with at-least-once delivery; clients dedup by
sequence number.
"""

from __future__ import annotations

import queue
from typing import Literal

from fastapi import FastAPI
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from . import gateway, service as service_mod
from .engine import ChoiceWithoutPrompt
from .events import EVENT_SESSION_ENDED
from .service import (
    ModalPending,
    SessionNotActive,
    SessionService,
    UnknownSession,
    UnknownTask,
    event_payload,
    external_event,
    metrics_payload,
    session_payload,
)

_KEEPALIVE_S = 0.25


class CreateSessionRequest(BaseModel):
    taskId: str
    condition: Literal["control", "cpg"]


class MessageRequest(BaseModel):
    text: str


class ModalRequest(BaseModel):
    choice: Literal["continue", "exit"]


class EndRequest(BaseModel):
    outcome: Literal["completed", "abandoned"] = "abandoned"


def create_app(svc: SessionService) -> FastAPI:
    app = FastAPI(title="chatprogress", version="0.1.0")

    def _task_for(state):
        return svc.tasks.get(state.task_id)

    @app.exception_handler(UnknownTask)
    @app.exception_handler(UnknownSession)
    async def _not_found(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(SessionNotActive)
    @app.exception_handler(ModalPending)
    @app.exception_handler(ChoiceWithoutPrompt)
    async def _conflict(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(gateway.BackendError)
    async def _bad_gateway(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=502, content={"error": str(exc)})

    @app.get("/tasks")
    def list_tasks():
        tasks = []
        for task_id in svc.tasks.ids():
            task = svc.tasks.get(task_id)
            tasks.append(
                {
                    "taskId": task_id,
                    "goal": task.goal_label,
                    "description": task.goal_description,
                    "subtaskCount": len(task.subtasks),
                }
            )
        return {"tasks": tasks}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        state = svc.create_session(body.taskId, body.condition)
        return session_payload(state, _task_for(state))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        state = svc.get_session(session_id)
        return session_payload(state, _task_for(state))

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageRequest):
        result = svc.submit_turn(session_id, body.text)
        return {
            "message": service_mod.message_payload(result.message),
            "progressEvents": [event_payload(e) for e in result.progress_events],
            "goalPrompted": result.goal_prompted,
        }

    @app.post("/sessions/{session_id}/modal")
    def post_modal(session_id: str, body: ModalRequest):
        state = svc.respond_modal(session_id, body.choice)
        return session_payload(state, _task_for(state))

    @app.post("/sessions/{session_id}/end")
    def post_end(session_id: str, body: EndRequest):
        state = svc.end_session(session_id, body.outcome)
        return session_payload(state, _task_for(state))

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str):
        return metrics_payload(svc.metrics(session_id))

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, after: int = 0):
        state = svc.get_session(session_id)
        condition = state.condition

        def sse(payload: dict) -> str:
            import json

            return f"id: {payload['sequence']}\ndata: {json.dumps(payload, sort_keys=True)}\n\n"

        def generate():
            subscriber = svc.subscribe(session_id)
            try:
                ended = False
                for event in svc.events(session_id, after_sequence=after):
                    payload = external_event(event, condition)
                    if payload is not None:
                        yield sse(payload)
                    if event.kind == EVENT_SESSION_ENDED:
                        ended = True
                if ended:
                    return
                while True:
                    try:
                        event = subscriber.get(timeout=_KEEPALIVE_S)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    payload = external_event(event, condition)
                    if payload is not None:
                        yield sse(payload)
                    if event.kind == EVENT_SESSION_ENDED:
                        return
            finally:
                svc.unsubscribe(session_id, subscriber)

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app
