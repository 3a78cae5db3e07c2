import { describe, expect, it } from "vitest";

import { applyEvent, clearFlash, emptyProgress, reconcile } from "../src/progress.js";
import type { ProgressPayload, SessionEventPayload } from "../src/types.js";

function completed(sequence: number, step: number, label?: string): SessionEventPayload {
  return {
    sessionId: "s1",
    sequence,
    kind: "subtask-completed",
    payload: { step, label: label ?? `Step ${step}` },
    timestamp: sequence * 1000,
  };
}

function goalPrompted(sequence: number, count = 1): SessionEventPayload {
  return {
    sessionId: "s1",
    sequence,
    kind: "goal-prompted",
    payload: { goalReachedCount: count },
    timestamp: sequence * 1000,
  };
}

describe("progress view model", () => {
  it("starts empty with a deactivated goal marker", () => {
    const vm = emptyProgress("RSA Encryption");
    expect(vm.markers).toEqual([]);
    expect(vm.goalMarker).toEqual({ label: "RSA Encryption", active: false });
    expect(vm.goalReachedCount).toBe(0);
    expect(vm.flash).toBe(false);
  });

  it("inserts a later-completed earlier step between existing markers", () => {
    let vm = emptyProgress("Goal");
    vm = applyEvent(vm, completed(4, 1));
    vm = applyEvent(vm, completed(7, 3));
    expect(vm.markers.map((m) => m.step)).toEqual([1, 3]);
    vm = applyEvent(vm, completed(9, 2));
    expect(vm.markers.map((m) => m.step)).toEqual([1, 2, 3]);
  });

  it("ignores duplicate deliveries by sequence", () => {
    let vm = emptyProgress("Goal");
    vm = applyEvent(vm, completed(4, 1));
    vm = applyEvent(vm, completed(4, 1));
    expect(vm.markers).toHaveLength(1);
  });

  it("keeps a single marker when the same step arrives under two sequences", () => {
    let vm = emptyProgress("Goal");
    vm = applyEvent(vm, completed(4, 2));
    vm = applyEvent(vm, completed(5, 2));
    expect(vm.markers.map((m) => m.step)).toEqual([2]);
  });

  it("activates the goal marker and flashes on goal-prompted", () => {
    let vm = emptyProgress("Goal");
    vm = applyEvent(vm, goalPrompted(12));
    expect(vm.goalMarker.active).toBe(true);
    expect(vm.goalReachedCount).toBe(1);
    expect(vm.flash).toBe(true);
    expect(clearFlash(vm).flash).toBe(false);
  });

  it("is idempotent for duplicated goal prompts", () => {
    let vm = emptyProgress("Goal");
    vm = applyEvent(vm, goalPrompted(12, 1));
    vm = clearFlash(vm);
    vm = applyEvent(vm, goalPrompted(12, 1));
    expect(vm.flash).toBe(false);
    expect(vm.goalReachedCount).toBe(1);
  });

  it("reconciles from a session snapshot while keeping dedup state", () => {
    let vm = emptyProgress("Goal");
    vm = applyEvent(vm, completed(4, 1));
    const snapshot: ProgressPayload = {
      completedSteps: [1, 2],
      displayOrder: [1, 2],
      markers: [
        { step: 2, label: "Second", active: true },
        { step: 1, label: "First", active: true },
      ],
      goalMarker: { label: "Goal", active: false },
      goalReachedCount: 0,
    };
    vm = reconcile(vm, snapshot);
    expect(vm.markers.map((m) => m.step)).toEqual([1, 2]);
    // a redelivery of an already-seen event stays a no-op
    const after = applyEvent(vm, completed(4, 1));
    expect(after.markers).toHaveLength(2);
  });
});
