// Client-side session state, folded from the event stream.
//
// The reducer mirrors the server's transition semantics and ignores any
// event whose sequence number was already applied, so an at-least-once
// stream with reconnects still produces exactly-once state updates (and no
// duplicated chart points).

import type { SessionEvent, SnapshotPayload, Stage } from "./types";

export interface PendingView {
  stage: Stage;
  raw: string;
  translated: string;
}

export interface LossPoint {
  seq: number;
  total: number;
}

export interface ClientState {
  lastSeq: number;
  stage: Stage;
  mode: "manual" | "auto";
  pending: PendingView | null;
  acceptedStages: Stage[];
  feedback: string | null;
  grades: { round: number; score: number }[];
  latestSnapshot: SnapshotPayload | null;
  snapshotCount: number;
  lossCurve: LossPoint[];
  exports: Record<string, string>;
  error: string | null;
  busy: boolean; // a request is in flight; decision controls disabled
}

const NEXT_STAGE: Partial<Record<Stage, Stage>> = {
  selection: "constraints",
  constraints: "score_terms",
  score_terms: "optimizing",
};

export function initialState(mode: "manual" | "auto" = "manual"): ClientState {
  return {
    lastSeq: -1,
    stage: "selection",
    mode,
    pending: null,
    acceptedStages: [],
    feedback: null,
    grades: [],
    latestSnapshot: null,
    snapshotCount: 0,
    lossCurve: [],
    exports: {},
    error: null,
    busy: false,
  };
}

export function reduce(state: ClientState, event: SessionEvent): ClientState {
  if (event.seq <= state.lastSeq) return state; // duplicate delivery
  const next: ClientState = { ...state, lastSeq: event.seq };
  const p = event.payload as Record<string, never> & Record<string, unknown>;
  switch (event.kind) {
    case "created":
      next.mode = (p.mode as "manual" | "auto") ?? state.mode;
      break;
    case "proposal":
      next.pending = { stage: p.stage as Stage, raw: String(p.raw), translated: "" };
      break;
    case "translation":
      if (next.pending) next.pending = { ...next.pending, translated: String(p.text) };
      break;
    case "accept": {
      const stage = (p.stage as Stage) ?? next.pending?.stage ?? state.stage;
      next.acceptedStages = [...state.acceptedStages, stage];
      next.pending = null;
      next.feedback = null;
      next.stage = NEXT_STAGE[stage] ?? state.stage;
      break;
    }
    case "reject":
      next.pending = null;
      next.feedback = (p.feedback as string) || null;
      break;
    case "feedback":
      next.feedback = (p.feedback as string) || null;
      break;
    case "grade":
      next.grades = [...state.grades, { round: Number(p.round), score: Number(p.score) }];
      break;
    case "mode_change":
      next.mode = p.mode as "manual" | "auto";
      break;
    case "snapshot": {
      const snapshot = p as unknown as SnapshotPayload;
      next.latestSnapshot = snapshot;
      next.snapshotCount = state.snapshotCount + 1;
      next.lossCurve = [...state.lossCurve, { seq: event.seq, total: snapshot.total }];
      break;
    }
    case "export":
      next.exports = { ...state.exports, [String(p.kind)]: String(p.file) };
      if (p.kind === "scene") next.stage = "done";
      break;
    case "error":
      next.error = String(p.message ?? "unknown error");
      next.stage = "failed";
      break;
    default:
      break; // forward-compatible: unknown kinds advance lastSeq only
  }
  return next;
}

export function reduceAll(state: ClientState, events: SessionEvent[]): ClientState {
  return events.reduce(reduce, state);
}

export function lossCurveIsMonotone(points: LossPoint[]): boolean {
  for (let i = 1; i < points.length; i++) {
    if (points[i].total > points[i - 1].total + 1e-9) return false;
  }
  return true;
}

export function decisionEnabled(state: ClientState): boolean {
  return state.mode === "manual" && state.pending !== null && !state.busy && state.pending.translated !== "";
}

export function exportsReady(state: ClientState): boolean {
  return state.stage === "done" && "scene" in state.exports;
}
