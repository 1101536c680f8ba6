/** Typed client for the planning service; all server access goes
 * through here.  The fetch implementation is injectable so contract
 * tests can run without a network. */

import type {
  EdgeOpsTable,
  PlanDoc,
  PlaybackResponse,
  RoadmapDoc,
  RoadmapEdit,
  SamplingParams,
  SketchResponse,
  SpecGraphDoc,
  XY,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const payload = await resp.json().catch(() => null);
    if (!resp.ok) {
      const code = payload?.code ?? "http_error";
      const message = payload?.message ?? `request failed with status ${resp.status}`;
      throw new ApiError(code, message, resp.status);
    }
    return payload as T;
  }

  createSession(body: { roadmap?: RoadmapDoc; image?: { path: string; width: number; height: number } } = {}) {
    return this.request<{ id: string; roadmap: RoadmapDoc }>("POST", "/sessions", body);
  }

  getRoadmap(sessionId: string) {
    return this.request<RoadmapDoc>("GET", `/sessions/${sessionId}/roadmap`);
  }

  putRoadmap(sessionId: string, roadmap: RoadmapDoc) {
    return this.request<RoadmapDoc>("PUT", `/sessions/${sessionId}/roadmap`, roadmap);
  }

  applyEdits(sessionId: string, edits: RoadmapEdit[]) {
    return this.request<RoadmapDoc>("POST", `/sessions/${sessionId}/edits`, edits);
  }

  submitSketch(sessionId: string, stroke: XY[], params?: SamplingParams) {
    const body: { stroke: XY[]; params?: SamplingParams } = { stroke };
    if (params) {
      body.params = params;
    }
    return this.request<SketchResponse>("POST", `/sessions/${sessionId}/sketches`, body);
  }

  putSpec(sessionId: string, spec: SpecGraphDoc) {
    return this.request<SpecGraphDoc>("PUT", `/sessions/${sessionId}/spec`, spec);
  }

  computePlan(sessionId: string) {
    return this.request<PlanDoc>("POST", `/sessions/${sessionId}/plan`);
  }

  getPlan(sessionId: string) {
    return this.request<PlanDoc>("GET", `/sessions/${sessionId}/plan`);
  }

  playbackStep(sessionId: string, dt: number) {
    return this.request<PlaybackResponse>("POST", `/sessions/${sessionId}/playback/step`, { dt });
  }

  edgeOps() {
    return this.request<EdgeOpsTable>("GET", "/edge-ops");
  }
}
