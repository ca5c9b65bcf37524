// Wire types for the guidance service. Mirrors protocol.md; every message
// carries the session id and a per-sender monotonically increasing seq.

export interface Envelope<K extends string, P> {
  kind: K;
  session: string;
  seq: number;
  payload: P;
}

export interface GuideEllipse {
  plan: number;
  phase: number;
  freelance: boolean;
  mean: number[];
  axes: number[]; // one standard deviation per pose dimension
  weight: number;
}

export interface BoxGeom {
  min: number[];
  max: number[];
}

export interface MazeGeometry {
  workspace: BoxGeom;
  walls: BoxGeom[];
}

export interface ScenarioDoc {
  variant: string;
  start: number[];
  targets: number[][];
  completion_radius: number;
  geometry: MazeGeometry;
  [extra: string]: unknown;
}

export interface ScenarioSync {
  scenario: ScenarioDoc;
  guides: GuideEllipse[];
  guides_version: number;
  params: {
    tau_max: number;
    k_damp: number;
    control_rate: number;
    delta_nu: number;
    p_progress: number;
  };
}

export interface FrameEvent {
  tick: number;
  kind: string;
  [extra: string]: unknown;
}

export interface GuidanceFramePayload {
  tick: number;
  wrench: number[];
  energy: number | null;
  plan_belief: number[];
  phase_beliefs: number[][];
  responsibilities: { plan: number; phase: number; value: number }[];
  guides_version: number;
  guides: GuideEllipse[] | null;
  events: FrameEvent[];
  pose_seq?: number;
}

export interface ReplanNotice {
  trigger: string;
  guides: GuideEllipse[];
  guides_version: number;
}

export interface PoseUpdate {
  pose: number[];
  velocity?: number[];
}

export type EnvEdit =
  | { op: "remove_wall"; index: number }
  | { op: "move_wall"; index: number; min: number[]; max: number[] }
  | { op: "add_wall"; min: number[]; max: number[] }
  | { op: "move_target"; index: number; pose: number[] };

export type ServerMessage =
  | Envelope<"scenario_sync", ScenarioSync>
  | Envelope<"guidance_frame", GuidanceFramePayload>
  | Envelope<"replan_notice", ReplanNotice>
  | Envelope<"error", { message: string }>;

export type ClientKind = "hello" | "pose_update" | "env_edit";
