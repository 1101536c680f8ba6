/** Browser wiring: canvas rendering, gestures, mode switching, and the
 * 10 Hz playback loop.  Gesture mapping for the web: long-press is a
 * 500 ms hold (or right-click); in sketching mode a drag starting on a
 * node draws a stroke, and node dragging needs the move toggle. */

import { ApiError, ServiceClient } from "./api.js";
import {
  EditMode,
  initialModeState,
  markDirty,
  ModeState,
  transitionMode,
} from "./modeState.js";
import { legalOperatorOptions, SLOTS } from "./operatorOptions.js";
import {
  buildLayers,
  emptyOverlay,
  OverlayLayer,
  OverlayState,
  submitStroke,
} from "./overlay.js";
import type { EdgeOpsTable, XY } from "./types.js";

const LONG_PRESS_MS = 500;
const PLAYBACK_POLL_MS = 100;
const PLAYBACK_DT_S = PLAYBACK_POLL_MS / 1000;

interface AppContext {
  client: ServiceClient;
  sessionId: string;
  overlay: OverlayState;
  modes: ModeState;
  edgeOps: EdgeOpsTable;
  canvas: HTMLCanvasElement;
  banner: HTMLElement;
  playbackTimer: number | null;
}

export async function bootstrap(root: HTMLElement, baseUrl: string): Promise<void> {
  const client = new ServiceClient(baseUrl);
  const created = await client.createSession({
    image: { path: "map.png", width: 800, height: 500 },
  });

  const canvas = document.createElement("canvas");
  canvas.width = created.roadmap.image.width;
  canvas.height = created.roadmap.image.height;
  const banner = document.createElement("div");
  banner.className = "banner";
  const toolbar = document.createElement("div");
  toolbar.className = "toolbar";
  root.append(toolbar, banner, canvas);

  const ctx: AppContext = {
    client,
    sessionId: created.id,
    overlay: emptyOverlay(),
    modes: initialModeState("roadmap"),
    edgeOps: await client.edgeOps(),
    canvas,
    banner,
    playbackTimer: null,
  };
  ctx.overlay.roadmap = created.roadmap;

  for (const mode of ["sketching", "roadmap", "ltl"] as EditMode[]) {
    const button = document.createElement("button");
    button.textContent = mode;
    button.onclick = () => void switchMode(ctx, mode);
    toolbar.append(button);
  }
  const planButton = document.createElement("button");
  planButton.textContent = "plan";
  planButton.onclick = () => void computePlan(ctx);
  toolbar.append(planButton);

  wireGestures(ctx);
  render(ctx);
}

async function switchMode(ctx: AppContext, requested: EditMode): Promise<void> {
  const { state, effects } = await transitionMode(ctx.modes, requested, {
    saveRoadmap: async () => {
      if (ctx.overlay.roadmap) {
        await ctx.client.putRoadmap(ctx.sessionId, ctx.overlay.roadmap);
      }
    },
  });
  ctx.modes = state;
  if (effects.banner) {
    showBanner(ctx, effects.banner);
  }
  render(ctx);
}

async function computePlan(ctx: AppContext): Promise<void> {
  try {
    ctx.overlay.plan = await ctx.client.computePlan(ctx.sessionId);
    startPlayback(ctx);
  } catch (err) {
    showBanner(ctx, err instanceof ApiError ? err.message : String(err));
  }
  render(ctx);
}

function startPlayback(ctx: AppContext): void {
  if (ctx.playbackTimer !== null) {
    window.clearInterval(ctx.playbackTimer);
  }
  ctx.playbackTimer = window.setInterval(async () => {
    try {
      const state = await ctx.client.playbackStep(ctx.sessionId, PLAYBACK_DT_S);
      ctx.overlay.playbackPose = state.pose;
      render(ctx);
    } catch {
      if (ctx.playbackTimer !== null) {
        window.clearInterval(ctx.playbackTimer);
        ctx.playbackTimer = null;
      }
    }
  }, PLAYBACK_POLL_MS);
}

function showBanner(ctx: AppContext, message: string): void {
  ctx.banner.textContent = message;
  ctx.banner.classList.add("visible");
  window.setTimeout(() => ctx.banner.classList.remove("visible"), 4000);
}

function wireGestures(ctx: AppContext): void {
  let pressTimer: number | null = null;
  let stroke: XY[] | null = null;

  const point = (ev: MouseEvent): XY => {
    const rect = ctx.canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  };

  ctx.canvas.addEventListener("contextmenu", (ev) => {
    ev.preventDefault();
    void createNode(ctx, point(ev));
  });

  ctx.canvas.addEventListener("mousedown", (ev) => {
    if (ev.button !== 0) {
      return;
    }
    const p = point(ev);
    pressTimer = window.setTimeout(() => {
      pressTimer = null;
      void createNode(ctx, p);
    }, LONG_PRESS_MS);
    if (ctx.modes.mode === "sketching") {
      stroke = [p];
    }
  });

  ctx.canvas.addEventListener("mousemove", (ev) => {
    if (stroke) {
      if (pressTimer !== null) {
        window.clearTimeout(pressTimer);
        pressTimer = null;
      }
      stroke.push(point(ev));
      ctx.overlay.stroke = stroke;
      render(ctx);
    }
  });

  ctx.canvas.addEventListener("mouseup", () => {
    if (pressTimer !== null) {
      window.clearTimeout(pressTimer);
      pressTimer = null;
    }
    if (stroke && stroke.length > 1) {
      const finished = stroke;
      stroke = null;
      void submitStroke(ctx.client, ctx.sessionId, ctx.overlay, finished).then(() => {
        const toast = ctx.overlay.toasts.pop();
        if (toast) {
          showBanner(ctx, toast);
        }
        render(ctx);
      });
    } else {
      stroke = null;
    }
  });
}

async function createNode(ctx: AppContext, p: XY): Promise<void> {
  if (ctx.modes.mode === "ltl") {
    return; // spec nodes are placed through the spec editor panel
  }
  try {
    ctx.overlay.roadmap = await ctx.client.applyEdits(ctx.sessionId, [
      { op: "add_node", x: p.x, y: p.y },
    ]);
    ctx.modes = markDirty(ctx.modes, "roadmap");
  } catch (err) {
    showBanner(ctx, err instanceof ApiError ? err.message : String(err));
  }
  render(ctx);
}

/** Options for the operator dropdowns of the spec editor. */
export function operatorChoices(ctx: AppContext, partial: Parameters<typeof legalOperatorOptions>[0]) {
  return legalOperatorOptions(partial, ctx.edgeOps);
}

function render(ctx: AppContext): void {
  const g = ctx.canvas.getContext("2d");
  if (!g) {
    return;
  }
  g.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  for (const layer of buildLayers(ctx.overlay)) {
    drawLayer(g, layer);
  }
}

function drawLayer(g: CanvasRenderingContext2D, layer: OverlayLayer): void {
  switch (layer.kind) {
    case "map":
      g.fillStyle = "#f4f1ea";
      g.fillRect(0, 0, layer.image.width, layer.image.height);
      break;
    case "roadmap": {
      const positions = new Map(layer.roadmap.nodes.map((n) => [n.id, n]));
      g.strokeStyle = "#333";
      g.lineWidth = 2;
      for (const [a, b] of layer.roadmap.edges) {
        const na = positions.get(a);
        const nb = positions.get(b);
        if (na && nb) {
          g.beginPath();
          g.moveTo(na.x, na.y);
          g.lineTo(nb.x, nb.y);
          g.stroke();
        }
      }
      for (const n of layer.roadmap.nodes) {
        g.fillStyle = n.id === layer.roadmap.start ? "#2a7" : "#333";
        g.beginPath();
        g.arc(n.x, n.y, 6, 0, Math.PI * 2);
        g.fill();
        if (n.props.length) {
          g.fillStyle = "#555";
          g.fillText(n.props.join(","), n.x + 8, n.y - 8);
        }
      }
      break;
    }
    case "sketch":
      g.strokeStyle = "#3a7d44";
      g.lineWidth = 2;
      g.beginPath();
      layer.stroke.forEach((p, i) => (i === 0 ? g.moveTo(p.x, p.y) : g.lineTo(p.x, p.y)));
      g.stroke();
      g.fillStyle = "#3a7d44";
      for (const p of layer.sampledPoints) {
        g.beginPath();
        g.arc(p.x, p.y, 3, 0, Math.PI * 2);
        g.fill();
      }
      break;
    case "bmp":
      g.strokeStyle = "#1565c0";
      g.lineWidth = 4;
      g.beginPath();
      layer.waypoints.forEach((p, i) => (i === 0 ? g.moveTo(p.x, p.y) : g.lineTo(p.x, p.y)));
      g.stroke();
      break;
    case "plan":
      g.lineWidth = 3;
      g.strokeStyle = "#e65100";
      g.beginPath();
      layer.prefix.forEach((p, i) => (i === 0 ? g.moveTo(p.x, p.y) : g.lineTo(p.x, p.y)));
      g.stroke();
      if (layer.suffix.length) {
        g.strokeStyle = "#8e24aa";
        g.setLineDash([6, 4]);
        g.beginPath();
        const loop = [...layer.suffix, layer.suffix[layer.suffix.length - 1]];
        loop.forEach((p, i) => (i === 0 ? g.moveTo(p.x, p.y) : g.lineTo(p.x, p.y)));
        g.stroke();
        g.setLineDash([]);
      }
      break;
    case "playback":
      g.fillStyle = "#d32f2f";
      g.beginPath();
      g.arc(layer.pose.x, layer.pose.y, 7, 0, Math.PI * 2);
      g.fill();
      g.strokeStyle = "#d32f2f";
      g.beginPath();
      g.moveTo(layer.pose.x, layer.pose.y);
      const rad = (layer.pose.heading * Math.PI) / 180;
      g.lineTo(layer.pose.x + 14 * Math.cos(rad), layer.pose.y + 14 * Math.sin(rad));
      g.stroke();
      break;
  }
}

export { SLOTS };
