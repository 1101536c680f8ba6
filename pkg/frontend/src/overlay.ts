/** Canvas overlay model.  Layers render bottom-up in a fixed z-order:
 * map image, roadmap, sketch (raw stroke plus sampled points), matched
 * walk, plan (prefix and suffix drawn distinctly), playback marker.
 * The matched-walk layer exists only after a successful sketch
 * submission round trip; a failed submission surfaces a toast instead,
 * so no sketch ever disappears silently. */

import type { ApiError, ServiceClient } from "./api.js";
import type {
  PlanDoc,
  PlaybackPose,
  RoadmapDoc,
  SamplingParams,
  SketchResponse,
  XY,
} from "./types.js";

export type LayerKind = "map" | "roadmap" | "sketch" | "bmp" | "plan" | "playback";

export const LAYER_ORDER: LayerKind[] = [
  "map",
  "roadmap",
  "sketch",
  "bmp",
  "plan",
  "playback",
];

export interface MapLayer {
  kind: "map";
  image: { path: string; width: number; height: number };
}

export interface RoadmapLayer {
  kind: "roadmap";
  roadmap: RoadmapDoc;
}

export interface SketchLayer {
  kind: "sketch";
  stroke: XY[];
  sampledPoints: XY[];
}

export interface BmpLayer {
  kind: "bmp";
  walk: string[];
  waypoints: XY[];
  cwpd: number;
}

export interface PlanLayer {
  kind: "plan";
  prefix: XY[];
  suffix: XY[];
}

export interface PlaybackLayer {
  kind: "playback";
  pose: PlaybackPose;
}

export type OverlayLayer =
  | MapLayer
  | RoadmapLayer
  | SketchLayer
  | BmpLayer
  | PlanLayer
  | PlaybackLayer;

export interface OverlayState {
  roadmap: RoadmapDoc | null;
  stroke: XY[] | null;
  sampledPoints: XY[] | null;
  matchedWalk: { walk: string[]; cwpd: number } | null;
  plan: PlanDoc | null;
  playbackPose: PlaybackPose | null;
  toasts: string[];
}

export function emptyOverlay(): OverlayState {
  return {
    roadmap: null,
    stroke: null,
    sampledPoints: null,
    matchedWalk: null,
    plan: null,
    playbackPose: null,
    toasts: [],
  };
}

function nodePositions(roadmap: RoadmapDoc): Map<string, XY> {
  return new Map(roadmap.nodes.map((n) => [n.id, { x: n.x, y: n.y }]));
}

/** The drawable layers for the current state, in z-order. */
export function buildLayers(state: OverlayState): OverlayLayer[] {
  const layers: OverlayLayer[] = [];
  if (state.roadmap) {
    layers.push({ kind: "map", image: state.roadmap.image });
    layers.push({ kind: "roadmap", roadmap: state.roadmap });
  }
  if (state.stroke) {
    layers.push({
      kind: "sketch",
      stroke: state.stroke,
      sampledPoints: state.sampledPoints ?? [],
    });
  }
  if (state.matchedWalk && state.roadmap) {
    const positions = nodePositions(state.roadmap);
    layers.push({
      kind: "bmp",
      walk: state.matchedWalk.walk,
      waypoints: state.matchedWalk.walk
        .map((id) => positions.get(id))
        .filter((p): p is XY => p !== undefined),
      cwpd: state.matchedWalk.cwpd,
    });
  }
  if (state.plan && state.roadmap) {
    const positions = nodePositions(state.roadmap);
    const resolve = (ids: string[]) =>
      ids.map((id) => positions.get(id)).filter((p): p is XY => p !== undefined);
    layers.push({
      kind: "plan",
      prefix: resolve(state.plan.prefix),
      suffix: resolve(state.plan.suffix),
    });
  }
  if (state.playbackPose) {
    layers.push({ kind: "playback", pose: state.playbackPose });
  }
  return layers;
}

/** Submits a finished stroke and folds the outcome into the overlay:
 * the matched walk on success, a toast on failure.  Returns the server
 * response when the match succeeded. */
export async function submitStroke(
  client: ServiceClient,
  sessionId: string,
  state: OverlayState,
  stroke: XY[],
  params?: SamplingParams,
): Promise<SketchResponse | null> {
  state.stroke = stroke;
  state.matchedWalk = null;
  state.sampledPoints = null;
  try {
    const resp = await client.submitSketch(sessionId, stroke, params);
    state.sampledPoints = resp.sampled_path.points;
    state.matchedWalk = { walk: resp.walk, cwpd: resp.cwpd };
    return resp;
  } catch (err) {
    const message =
      (err as ApiError).message ?? "sketch submission failed";
    state.toasts.push(message);
    return null;
  }
}
