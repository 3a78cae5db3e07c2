// Browser bootstrap: create a session, wire the input, stream events.
//
// Progress markers are never rendered optimistically: they appear only
// when the server confirms a completion, either in the turn response or
// on the event stream (the reducer dedups the overlap).

import { ApiClient } from "./api.js";
import { mount } from "./dom.js";
import {
  applyEvent,
  clearFlash,
  emptyProgress,
  reconcile,
  type ProgressViewModel,
} from "./progress.js";
import { EventStreamClient } from "./sse.js";
import type { Condition, MessagePayload, SessionEventPayload, SessionPayload } from "./types.js";
import { findByClass, renderApp, type AppView } from "./view.js";

interface AppState {
  session: SessionPayload;
  messages: MessagePayload[];
  progress: ProgressViewModel | null;
  modal: "hidden" | "prompting" | "summary";
  busy: boolean;
  ended: boolean;
}

function viewOf(state: AppState): AppView {
  return {
    goal: state.session.goal,
    description: state.session.description,
    condition: state.session.condition,
    messages: state.messages,
    progress: state.progress,
    modal: state.modal,
    busy: state.busy,
    ended: state.ended,
    interactionCount: state.messages.filter((m) => m.role === "user").length,
  };
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "");
  const taskId = params.get("task") ?? "rsa-encryption";
  const condition = (params.get("condition") ?? "cpg") as Condition;
  const root = document.getElementById("app") as HTMLElement;

  const session = await api.createSession(taskId, condition);
  const state: AppState = {
    session,
    messages: [...session.history],
    progress: condition === "cpg" ? emptyProgress(session.goal) : null,
    modal: "hidden",
    busy: false,
    ended: false,
  };

  function applyProgressEvent(event: SessionEventPayload): void {
    if (state.progress === null) {
      return;
    }
    const before = state.progress;
    state.progress = applyEvent(state.progress, event);
    if (event.kind === "goal-prompted" && state.progress !== before) {
      state.modal = "prompting";
    }
  }

  function render(): void {
    const tree = renderApp(viewOf(state));
    const [form] = findByClass(tree, "input-row");
    if (form) {
      form.on = { submit: onSend };
    }
    const [cont] = findByClass(tree, "modal-continue");
    if (cont) {
      cont.on = { click: () => void onModal("continue") };
    }
    const [exit] = findByClass(tree, "modal-exit");
    if (exit) {
      exit.on = { click: () => void onModal("exit") };
    }
    mount(root, tree);
    const history = root.querySelector(".chat-history");
    history?.scrollTo(0, history.scrollHeight);
  }

  function onSend(): void {
    const input = root.querySelector<HTMLInputElement>("input.chat-input");
    const text = input?.value.trim();
    if (!text || state.busy || state.ended || state.modal === "prompting") {
      return;
    }
    state.busy = true;
    render();
    void api
      .postMessage(session.sessionId, text)
      .then((turn) => {
        state.messages.push({
          role: "user",
          text,
          turnIndex: turn.message.turnIndex - 1,
          timestamp: turn.message.timestamp,
        });
        state.messages.push(turn.message);
        for (const event of turn.progressEvents) {
          applyProgressEvent(event);
        }
      })
      .catch((error) => {
        console.error("turn failed; your question was kept, retry to resend", error);
      })
      .finally(() => {
        state.busy = false;
        render();
        if (state.progress?.flash) {
          setTimeout(() => {
            state.progress = state.progress && clearFlash(state.progress);
            render();
          }, 1200);
        }
      });
  }

  async function onModal(choice: "continue" | "exit"): Promise<void> {
    const updated = await api.postModal(session.sessionId, choice);
    state.session = updated;
    if (choice === "exit") {
      state.modal = "summary";
      state.ended = true;
    } else {
      state.modal = "hidden";
    }
    render();
  }

  const stream = new EventStreamClient(
    api.baseUrl,
    session.sessionId,
    {
      onEvent: (event) => {
        if (event.kind === "user-message" || event.kind === "agent-message") {
          const turnIndex = event.payload.turnIndex as number;
          if (!state.messages.some((m) => m.turnIndex === turnIndex)) {
            state.messages.push({
              role: event.kind === "user-message" ? "user" : "task-agent",
              text: String(event.payload.text),
              turnIndex,
              timestamp: event.timestamp,
            });
            state.messages.sort((a, b) => a.turnIndex - b.turnIndex);
          }
        } else {
          applyProgressEvent(event);
        }
        if (event.kind === "session-ended") {
          state.ended = true;
        }
        render();
      },
      onReconnect: async () => {
        const snapshot = await api.getSession(session.sessionId);
        state.messages = [...snapshot.history];
        if (state.progress && snapshot.progress) {
          state.progress = reconcile(state.progress, snapshot.progress);
        }
        state.ended = snapshot.status !== "active";
        render();
      },
    },
  );
  void stream.run();
  render();
}

void boot();
