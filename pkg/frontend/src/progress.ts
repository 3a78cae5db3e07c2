// Progress view model: the client-side mirror of the server's marker state.
//
// Markers exist only for completed subtasks and always render in ascending
// step order no matter the completion order. Events may arrive more than
// once (POST response and stream, or redelivery after a reconnect), so the
// reducer dedups by sequence number before applying anything.

import type { ProgressPayload, SessionEventPayload } from "./types.js";

export interface Marker {
  step: number;
  label: string;
}

export interface ProgressViewModel {
  markers: Marker[]; // sorted ascending by step
  goalMarker: { label: string; active: boolean };
  goalReachedCount: number;
  flash: boolean; // highlight pulse on the turn the goal was reached
  seenSequences: ReadonlySet<number>;
}

export function emptyProgress(goalLabel: string): ProgressViewModel {
  return {
    markers: [],
    goalMarker: { label: goalLabel, active: false },
    goalReachedCount: 0,
    flash: false,
    seenSequences: new Set(),
  };
}

function insertSorted(markers: Marker[], marker: Marker): Marker[] {
  if (markers.some((m) => m.step === marker.step)) {
    return markers;
  }
  const next = [...markers, marker];
  next.sort((a, b) => a.step - b.step);
  return next;
}

/** Apply one stream event; duplicates (by sequence) are no-ops. */
export function applyEvent(
  vm: ProgressViewModel,
  event: SessionEventPayload,
): ProgressViewModel {
  if (vm.seenSequences.has(event.sequence)) {
    return vm;
  }
  const seen = new Set(vm.seenSequences);
  seen.add(event.sequence);
  if (event.kind === "subtask-completed") {
    const step = event.payload.step as number;
    const label = String(event.payload.label ?? `Step ${step}`);
    return { ...vm, markers: insertSorted(vm.markers, { step, label }), seenSequences: seen };
  }
  if (event.kind === "goal-prompted") {
    return {
      ...vm,
      goalMarker: { ...vm.goalMarker, active: true },
      goalReachedCount: event.payload.goalReachedCount as number,
      flash: true,
      seenSequences: seen,
    };
  }
  return { ...vm, seenSequences: seen };
}

/** Clear the one-shot goal flash after the UI has shown it. */
export function clearFlash(vm: ProgressViewModel): ProgressViewModel {
  return vm.flash ? { ...vm, flash: false } : vm;
}

/**
 * Rebuild the view model from a full session snapshot (used after a
 * reconnect). Already-seen sequences are kept so redelivered events
 * stay idempotent.
 */
export function reconcile(
  vm: ProgressViewModel,
  progress: ProgressPayload,
): ProgressViewModel {
  return {
    markers: progress.markers
      .map((m) => ({ step: m.step, label: m.label }))
      .sort((a, b) => a.step - b.step),
    goalMarker: { ...progress.goalMarker },
    goalReachedCount: progress.goalReachedCount,
    flash: false,
    seenSequences: vm.seenSequences,
  };
}
