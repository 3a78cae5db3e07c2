// Wire types for the session service HTTP API and event stream.

export type Condition = "control" | "cpg";
export type Role = "user" | "task-agent" | "system";
export type ModalChoice = "continue" | "exit";

export interface MessagePayload {
  role: Role;
  text: string;
  turnIndex: number;
  timestamp: number;
}

export interface MarkerPayload {
  step: number;
  label: string;
  active: boolean;
}

export interface ProgressPayload {
  completedSteps: number[];
  displayOrder: number[];
  markers: MarkerPayload[];
  goalMarker: { label: string; active: boolean };
  goalReachedCount: number;
}

export interface SessionPayload {
  sessionId: string;
  taskId: string;
  condition: Condition;
  status: "active" | "completed" | "abandoned";
  goal: string;
  description: string;
  startedAt: number;
  endedAt: number | null;
  interactionCount: number;
  history: MessagePayload[];
  // present only for cpg sessions
  progress?: ProgressPayload;
  modal?: { phase: string };
}

export interface SessionEventPayload {
  sessionId: string;
  sequence: number;
  kind:
    | "session-created"
    | "user-message"
    | "agent-message"
    | "subtask-completed"
    | "goal-prompted"
    | "modal-choice"
    | "session-ended";
  payload: Record<string, unknown>;
  timestamp: number;
}

export interface TurnPayload {
  message: MessagePayload;
  progressEvents: SessionEventPayload[];
  goalPrompted: boolean;
}
