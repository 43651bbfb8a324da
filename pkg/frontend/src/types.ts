// Wire types for the gateway API (see the backend README for the routes).

export type Stage =
  | "selection"
  | "constraints"
  | "score_terms"
  | "optimizing"
  | "done"
  | "failed";

export type Mode = "manual" | "auto";

export const DECISION_STAGES: Stage[] = ["selection", "constraints", "score_terms"];

export interface WallFeature {
  kind: "door" | "window" | "open";
  wall_index: number;
  start: number;
  end: number;
  swing_depth: number;
}

export interface RoomDoc {
  room_type: string;
  function: string;
  size: number;
  requirement: string;
  polygon: { vertices: [number, number][]; features: WallFeature[] };
}

export interface SessionView {
  id: string;
  stage: Stage;
  mode: Mode;
  name: string;
  room: RoomDoc;
  accepted_stages: Stage[];
  has_pending: boolean;
  feedback: string | null;
  grades: { stage: Stage; round: number; score: number }[];
  exports: Record<string, string>;
  snapshot_count: number;
  error: string | null;
  event_count: number;
  state_hash: string;
}

export interface Proposal {
  stage: Stage;
  raw: string;
  translated: string;
}

export interface PlacementDoc {
  id: string;
  object_name: string;
  center: [number, number];
  half_extents: [number, number];
  rotation: number;
  tier: string;
  parent: string | null;
}

export interface SnapshotPayload {
  layout: { placements: PlacementDoc[] };
  loss: number;
  violation: number;
  total: number;
}

export interface SessionEvent {
  seq: number;
  ts: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface SceneObject {
  id: string;
  object_name: string;
  dims: [number, number, number];
  position: [number, number];
  rotation: number;
  tier: string;
  parent: string | null;
}

export interface SceneDoc {
  format: string;
  room: RoomDoc;
  objects: SceneObject[];
  metrics: Record<string, number>;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
