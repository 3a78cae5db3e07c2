// Minimal VNode-to-DOM renderer: rebuild the subtree on every state change.
// Fine at this scale; markers only ever accrete.

import type { VChild, VNode } from "./view.js";

export function build(node: VChild): Node {
  if (typeof node === "string") {
    return document.createTextNode(node);
  }
  const element = document.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    element.setAttribute(name, value);
  }
  for (const [event, handler] of Object.entries(node.on ?? {})) {
    element.addEventListener(event, (raw) => {
      raw.preventDefault();
      handler();
    });
  }
  for (const child of node.children) {
    element.appendChild(build(child));
  }
  return element;
}

export function mount(root: HTMLElement, node: VNode): void {
  root.replaceChildren(build(node));
}
