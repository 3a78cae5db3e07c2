// Headless component tests: the render tree is inspected structurally,
// driven by a stubbed stream of session events.

import { describe, expect, it } from "vitest";

import { applyEvent, emptyProgress, type ProgressViewModel } from "../src/progress.js";
import type { MessagePayload, SessionEventPayload } from "../src/types.js";
import { findAll, findByClass, renderApp, renderProgressBar, type AppView } from "../src/view.js";

const STUB_STREAM: SessionEventPayload[] = [
  { sessionId: "s1", sequence: 4, kind: "subtask-completed", payload: { step: 1, label: "Understanding RSA Encryption Method" }, timestamp: 4000 },
  { sessionId: "s1", sequence: 7, kind: "subtask-completed", payload: { step: 3, label: "Euler's Totient Function" }, timestamp: 7000 },
  { sessionId: "s1", sequence: 9, kind: "subtask-completed", payload: { step: 2, label: "Multiplication of Primes" }, timestamp: 9000 },
];

function playStream(events: SessionEventPayload[]): ProgressViewModel {
  let vm = emptyProgress("RSA Encryption");
  for (const event of events) {
    vm = applyEvent(vm, event);
  }
  return vm;
}

function baseView(overrides: Partial<AppView> = {}): AppView {
  return {
    goal: "RSA Encryption",
    description: "Encrypt the string.",
    condition: "cpg",
    messages: [],
    progress: emptyProgress("RSA Encryption"),
    modal: "hidden",
    busy: false,
    ended: false,
    interactionCount: 0,
    ...overrides,
  };
}

describe("progress bar rendering", () => {
  it("renders a fresh session as an empty bar with a deactivated goal marker", () => {
    const bar = renderProgressBar(emptyProgress("RSA Encryption"));
    expect(findByClass(bar, "marker")).toHaveLength(0);
    const [goal] = findByClass(bar, "goal-marker");
    expect(goal.children).toContain("RSA Encryption");
    expect(goal.attrs.class).not.toContain("active");
  });

  it("renders events delivered [1,3,2] as markers left-to-right [1,2,3]", () => {
    const bar = renderProgressBar(playStream(STUB_STREAM));
    const steps = findByClass(bar, "marker").map((m) => m.attrs["data-step"]);
    expect(steps).toEqual(["1", "2", "3"]);
    // markers precede the goal marker in document order
    const classes = bar.children.map((c) => (typeof c === "string" ? "" : c.attrs.class));
    expect(classes[classes.length - 1]).toContain("goal-marker");
  });

  it("renders duplicate deliveries once", () => {
    const vm = playStream([...STUB_STREAM, STUB_STREAM[1]]);
    const bar = renderProgressBar(vm);
    expect(findByClass(bar, "marker")).toHaveLength(3);
  });

  it("shows only completed labels, never upcoming ones", () => {
    const rendered = JSON.stringify(renderProgressBar(playStream(STUB_STREAM)));
    expect(rendered).toContain("Multiplication of Primes");
    expect(rendered).not.toContain("Public Key Generation");
    expect(rendered).not.toContain("Encryption Using RSA");
  });

  it("activates the goal marker after goal-prompted", () => {
    const vm = playStream([
      ...STUB_STREAM,
      { sessionId: "s1", sequence: 12, kind: "goal-prompted", payload: { goalReachedCount: 1 }, timestamp: 12_000 },
    ]);
    const [goal] = findByClass(renderProgressBar(vm), "goal-marker");
    expect(goal.attrs.class).toContain("active");
  });
});

describe("app rendering", () => {
  it("control mode renders no progress elements at all", () => {
    const view = baseView({ condition: "control", progress: null });
    const tree = renderApp(view);
    for (const cls of ["progress-bar", "marker", "goal-marker", "modal"]) {
      expect(findByClass(tree, cls)).toHaveLength(0);
    }
    expect(JSON.stringify(tree)).not.toContain("data-step");
  });

  it("cpg mode places the bar between history and input", () => {
    const tree = renderApp(baseView({ progress: playStream(STUB_STREAM) }));
    const order = tree.children.map((c) => (typeof c === "string" ? "" : c.attrs.class));
    const history = order.findIndex((c) => c.includes("chat-history"));
    const bar = order.findIndex((c) => c.includes("progress-bar"));
    const input = order.findIndex((c) => c.includes("input-row"));
    expect(history).toBeLessThan(bar);
    expect(bar).toBeLessThan(input);
  });

  it("completion modal blocks the chat input until answered", () => {
    const tree = renderApp(baseView({ modal: "prompting" }));
    const [modal] = findByClass(tree, "modal");
    expect(findByClass(modal, "modal-continue")).toHaveLength(1);
    expect(findByClass(modal, "modal-exit")).toHaveLength(1);
    const [input] = findByClass(tree, "chat-input");
    expect(input.attrs.disabled).toBe("disabled");
  });

  it("exit shows a summary and disables input", () => {
    const tree = renderApp(baseView({ modal: "summary", ended: true, interactionCount: 7 }));
    const [summary] = findByClass(tree, "summary");
    expect(JSON.stringify(summary)).toContain("7 question(s)");
    const [input] = findByClass(tree, "chat-input");
    expect(input.attrs.disabled).toBe("disabled");
  });

  it("chat transcript renders messages in turn order", () => {
    const messages: MessagePayload[] = [
      { role: "user", text: "q1", turnIndex: 0, timestamp: 1 },
      { role: "task-agent", text: "a1", turnIndex: 1, timestamp: 2 },
      { role: "user", text: "q2", turnIndex: 2, timestamp: 3 },
    ];
    const tree = renderApp(baseView({ messages }));
    const turns = findAll(tree, (n) => "data-turn" in n.attrs).map((n) => n.attrs["data-turn"]);
    expect(turns).toEqual(["0", "1", "2"]);
  });
});
