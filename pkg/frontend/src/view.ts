// View tree for the chat screen.
//
// Components build a plain virtual-node tree so they can be tested
// headlessly; src/dom.ts turns the tree into real DOM in the browser.
// Layout: the conversation history takes the dominant area, with the
// progress bar as a single compact strip above the input (cpg only).

import type { Marker, ProgressViewModel } from "./progress.js";
import type { MessagePayload } from "./types.js";

export type VChild = VNode | string;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  on?: Record<string, () => void>;
  children: VChild[];
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (VChild | VChild[])[]
): VNode {
  return { tag, attrs, children: children.flat() };
}

export function withHandlers(node: VNode, on: Record<string, () => void>): VNode {
  return { ...node, on };
}

export type ModalView = "hidden" | "prompting" | "summary";

export interface AppView {
  goal: string;
  description: string;
  condition: "control" | "cpg";
  messages: MessagePayload[];
  progress: ProgressViewModel | null; // null in control mode
  modal: ModalView;
  busy: boolean;
  ended: boolean;
  interactionCount: number;
}

function renderMarker(marker: Marker): VNode {
  return h(
    "li",
    { class: "marker active", "data-step": String(marker.step), title: marker.label },
    marker.label,
  );
}

export function renderProgressBar(vm: ProgressViewModel): VNode {
  const goalClass = vm.goalMarker.active ? "goal-marker active" : "goal-marker";
  return h(
    "ul",
    { class: vm.flash ? "progress-bar flash" : "progress-bar" },
    ...vm.markers.map(renderMarker),
    h("li", { class: goalClass, "data-goal": "true" }, vm.goalMarker.label),
  );
}

function renderMessage(message: MessagePayload): VNode {
  return h(
    "div",
    { class: `message ${message.role}`, "data-turn": String(message.turnIndex) },
    h("span", { class: "role" }, message.role === "task-agent" ? "agent" : message.role),
    h("span", { class: "text" }, message.text),
  );
}

export function renderChat(messages: MessagePayload[]): VNode {
  return h("div", { class: "chat-history" }, ...messages.map(renderMessage));
}

export function renderModal(view: AppView): VNode {
  if (view.modal === "summary") {
    return h(
      "div",
      { class: "modal summary" },
      h("h2", {}, "Session complete"),
      h(
        "p",
        {},
        `You finished "${view.goal}" after ${view.interactionCount} question(s).`,
      ),
    );
  }
  return h(
    "div",
    { class: "modal completion" },
    h("h2", {}, "Task complete?"),
    h("p", {}, "Every step of the task looks finished. Exit now, or keep chatting."),
    h("button", { class: "modal-continue" }, "Continue conversation"),
    h("button", { class: "modal-exit" }, "Exit"),
  );
}

export function renderInput(view: AppView): VNode {
  const blocked = view.modal === "prompting" || view.ended || view.busy;
  const attrs: Record<string, string> = {
    class: "chat-input",
    type: "text",
    placeholder: view.ended ? "session ended" : "Ask the task agent...",
  };
  if (blocked) {
    attrs.disabled = "disabled";
  }
  return h(
    "form",
    { class: "input-row" },
    h("input", attrs),
    h("button", blocked ? { class: "send", disabled: "disabled" } : { class: "send" }, "Send"),
  );
}

export function renderApp(view: AppView): VNode {
  const children: VNode[] = [
    h("header", { class: "goal-header" }, h("h1", {}, view.goal), h("p", {}, view.description)),
    renderChat(view.messages),
  ];
  if (view.condition === "cpg" && view.progress) {
    children.push(renderProgressBar(view.progress));
  }
  children.push(renderInput(view));
  if (view.condition === "cpg" && view.modal !== "hidden") {
    children.push(renderModal(view));
  }
  return h("div", { class: "app" }, ...children);
}

/** Depth-first search over a view tree; handy for structural assertions. */
export function findAll(node: VChild, predicate: (n: VNode) => boolean): VNode[] {
  if (typeof node === "string") {
    return [];
  }
  const hits = predicate(node) ? [node] : [];
  return hits.concat(node.children.flatMap((child) => findAll(child, predicate)));
}

export function findByClass(node: VChild, className: string): VNode[] {
  return findAll(node, (n) => (n.attrs.class ?? "").split(" ").includes(className));
}
