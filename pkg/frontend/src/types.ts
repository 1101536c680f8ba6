/** Wire formats of the planning service. */

export interface ImageRef {
  path: string;
  width: number;
  height: number;
}

export interface RoadmapNodeDoc {
  id: string;
  x: number;
  y: number;
  props: string[];
}

export interface RoadmapDoc {
  version: number;
  image: ImageRef;
  nodes: RoadmapNodeDoc[];
  edges: [string, string][];
  start: string | null;
}

export type NodeColor = "green" | "red";

export interface SpecNodeDoc {
  id: string;
  x: number;
  y: number;
  color: NodeColor;
  label: string;
}

/** One operator slot; null is the empty choice (no operator). */
export type OpValue = string | null;

export interface SpecEdgeDoc {
  from: string;
  to: string;
  bo2: OpValue;
  to2: OpValue;
  to1: OpValue;
}

export interface SpecGraphDoc {
  nodes: SpecNodeDoc[];
  edges: SpecEdgeDoc[];
  start: string | null;
}

export interface XY {
  x: number;
  y: number;
}

export interface SamplingParams {
  d_m: number;
  theta_m: number;
}

export interface SketchResponse {
  sampled_path: { points: XY[]; q_start: string; q_end: string };
  walk: string[];
  cwpd: number;
  bmp_ms: number;
}

export interface PlanSegmentDoc {
  from: string;
  to: string;
  source: "preferred" | "fallback";
  waypoints: string[];
}

export interface PlanDoc {
  prefix: string[];
  suffix: string[];
  formula: string | null;
  segments: PlanSegmentDoc[];
  stats: { bmp_ms: number; plan_ms: number; cwpd: number[] };
}

export interface PlaybackPose {
  x: number;
  y: number;
  heading: number;
}

export interface PlaybackResponse {
  step: number;
  pose: PlaybackPose;
}

export type EdgeOpsCombo = [OpValue, OpValue, OpValue];

export interface EdgeOpsTable {
  allowed: EdgeOpsCombo[];
}

export interface RoadmapEdit {
  op: string;
  [key: string]: unknown;
}
