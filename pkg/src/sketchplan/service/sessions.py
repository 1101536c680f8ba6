"""In-memory sessions tying roadmap editing, sketching, specs, planning,
and plan playback together.

Sessions hold immutable core values and swap them under a per-session
lock, so concurrent requests to one session serialize while separate
sessions proceed in parallel.  Editing the roadmap invalidates every
sketch match and plan derived from the old revision.
"""

from __future__ import annotations

import math
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..geometry import Point, SamplingParams, dist
from ..ltl.formulas import Formula
from ..ltl.spec_graph import (
    SpecGraph,
    SpecGraphError,
    default_spec_graph,
    save_spec_graph,
    validate_spec_graph,
)
from ..automata import UnsatisfiableError, build_product, ltl_to_buchi
from ..ltl.spec_graph import graph_to_formula
from ..matching import MatchConfig, MatchError, SampledPath, match_stroke
from ..planner import Plan, PreferredPath, audit_plan, extended_planner, plan_document
from ..roadmap import (
    Roadmap,
    RoadmapError,
    apply_edit,
    save_roadmap,
    to_transition_system,
)

PLAYBACK_SPEED_WIDTHS_PER_S = 0.2
DENSIFY_RETRIES = 3

__all__ = ["ServiceError", "SketchRecord", "PlaybackState", "Session", "SessionStore"]


class ServiceError(Exception):
    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


@dataclass
class SketchRecord:
    raw: tuple[Point, ...]
    params: SamplingParams
    sampled: SampledPath
    walk: tuple[str, ...]
    cwpd: float
    bmp_ms: float


@dataclass
class PlaybackState:
    step: int
    pose: Point
    heading: float
    travelled: float = 0.0


@dataclass
class Session:
    id: str
    roadmap: Roadmap
    sketches: list[SketchRecord] = field(default_factory=list)
    spec_graph: SpecGraph | None = None
    plan: Plan | None = None
    playback_travelled: float = 0.0
    lock: threading.RLock = field(default_factory=threading.RLock)


def _collapse_repeats(walk) -> tuple[str, ...]:
    out = [walk[0]]
    for q in walk[1:]:
        if q != out[-1]:
            out.append(q)
    return tuple(out)


def preferred_paths(session: Session) -> tuple[PreferredPath, ...]:
    """The preferred path set: one path per matched sketch, with the
    walk's stay-repetitions collapsed."""
    paths = []
    for record in session.sketches:
        waypoints = _collapse_repeats(record.walk)
        if len(waypoints) < 2:
            continue  # sketch that never leaves its node biases nothing
        paths.append(
            PreferredPath(
                start=record.sampled.q_start,
                end=record.sampled.q_end,
                waypoints=waypoints,
            )
        )
    return tuple(paths)


class SessionStore:
    """Sessions by id, with optional write-through snapshots of the
    roadmap and spec documents."""

    def __init__(self, snapshot_dir: str | Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None

    def create(self, roadmap: Roadmap | None = None) -> Session:
        session = Session(id=uuid.uuid4().hex[:12], roadmap=roadmap or Roadmap())
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError("unknown_session", "no such session", 404)
        return session

    def snapshot(self, session: Session) -> None:
        if self.snapshot_dir is None:
            return
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        (self.snapshot_dir / f"{session.id}.roadmap.json").write_bytes(
            save_roadmap(session.roadmap)
        )
        if session.spec_graph is not None:
            (self.snapshot_dir / f"{session.id}.spec.json").write_bytes(
                save_spec_graph(session.spec_graph)
            )

    # -- mutations ---------------------------------------------------

    def replace_roadmap(self, session: Session, roadmap: Roadmap) -> None:
        with session.lock:
            session.roadmap = roadmap
            self._invalidate(session)
            self.snapshot(session)

    def apply_edits(self, session: Session, edits: list[dict]) -> Roadmap:
        with session.lock:
            roadmap = session.roadmap
            for edit in edits:
                try:
                    roadmap = apply_edit(roadmap, edit)
                except RoadmapError as e:
                    raise ServiceError("edit_rejected", str(e), 422) from e
            session.roadmap = roadmap
            self._invalidate(session)
            self.snapshot(session)
            return roadmap

    def _invalidate(self, session: Session) -> None:
        # Sketch matches and plans are only meaningful against the
        # roadmap revision they were computed from.
        session.sketches.clear()
        session.plan = None
        session.playback_travelled = 0.0

    def submit_sketch(
        self,
        session: Session,
        raw: list[Point],
        params: SamplingParams | None = None,
    ) -> SketchRecord:
        with session.lock:
            if not session.roadmap.nodes:
                raise ServiceError("no_nodes", "no nodes", 409)
            try:
                ts = to_transition_system(session.roadmap)
            except RoadmapError as e:
                raise ServiceError("start_node_unset", str(e), 409) from e
            try:
                sampled, walk, value, bmp_ms, used = match_stroke(
                    raw,
                    session.roadmap,
                    ts,
                    params,
                    MatchConfig(),
                    max_densify=DENSIFY_RETRIES,
                )
            except MatchError as e:
                raise ServiceError("match_failed", str(e), 422) from e
            except ValueError as e:
                raise ServiceError("bad_stroke", str(e), 422) from e
            record = SketchRecord(
                raw=tuple(raw),
                params=used,
                sampled=sampled,
                walk=tuple(walk),
                cwpd=value,
                bmp_ms=bmp_ms,
            )
            session.sketches.append(record)
            return record

    def put_spec(self, session: Session, spec: SpecGraph) -> None:
        violations = validate_spec_graph(spec)
        if violations:
            raise ServiceError("invalid_spec", "; ".join(violations), 422)
        with session.lock:
            session.spec_graph = spec
            session.plan = None
            session.playback_travelled = 0.0
            self.snapshot(session)

    def compute_plan(self, session: Session) -> tuple[Plan, dict]:
        with session.lock:
            spec = session.spec_graph
            if spec is None:
                if not session.sketches:
                    raise ServiceError(
                        "no_spec", "no specification and no sketches", 409
                    )
                first = session.sketches[0]
                try:
                    spec = default_spec_graph(
                        session.roadmap, first.sampled.q_start, first.sampled.q_end
                    )
                except SpecGraphError as e:
                    raise ServiceError("no_default_spec", str(e), 422) from e
            violations = validate_spec_graph(spec)
            if violations:
                raise ServiceError("invalid_spec", "; ".join(violations), 422)
            formula = graph_to_formula(spec)
            try:
                ts = to_transition_system(session.roadmap)
            except RoadmapError as e:
                raise ServiceError("start_node_unset", str(e), 409) from e
            t0 = time.perf_counter()
            try:
                ba = ltl_to_buchi(formula)
                pa = build_product(ts, ba)
                plan = extended_planner(
                    pa, ts, preferred_paths(session), formula=formula
                )
            except UnsatisfiableError as e:
                raise ServiceError("unsatisfiable", str(e), 422) from e
            plan_ms = (time.perf_counter() - t0) * 1000.0
            sketches = session.sketches
            plan.stats = {
                "plan_ms": plan_ms,
                "bmp_ms": (
                    sum(s.bmp_ms for s in sketches) / len(sketches) if sketches else 0.0
                ),
                "cwpd": [s.cwpd for s in sketches],
            }
            session.plan = plan
            session.playback_travelled = 0.0
            self.snapshot(session)
            return plan, plan_document(plan)

    def get_plan(self, session: Session) -> dict:
        with session.lock:
            if session.plan is None:
                raise ServiceError("no_plan", "no plan", 404)
            ts = to_transition_system(session.roadmap)
            if not audit_plan(session.plan, ts):
                raise ServiceError("stale_plan", "stored plan fails its audit", 409)
            return plan_document(session.plan)

    def playback_step(self, session: Session, dt: float) -> PlaybackState:
        with session.lock:
            if session.plan is None:
                raise ServiceError("no_plan", "no plan", 409)
            if dt < 0 or not math.isfinite(dt):
                raise ServiceError("bad_dt", "dt must be a finite non-negative number", 422)
            speed = PLAYBACK_SPEED_WIDTHS_PER_S * session.roadmap.image_size[0]
            session.playback_travelled += speed * dt
            return _locate(session, session.playback_travelled)


def _locate(session: Session, travelled: float) -> PlaybackState:
    plan = session.plan
    positions = session.roadmap.positions()
    prefix = [positions[q] for q in plan.prefix]
    suffix = [positions[q] for q in plan.suffix]

    prefix_steps = list(zip(prefix, prefix[1:]))
    prefix_len = sum(dist(a, b) for a, b in prefix_steps)

    if suffix:
        loop_pts = [prefix[-1], *suffix]
        loop_steps = list(zip(loop_pts, loop_pts[1:]))
        loop_len = sum(dist(a, b) for a, b in loop_steps)
    else:
        loop_steps = []
        loop_len = 0.0

    if travelled <= prefix_len or not loop_steps:
        d = min(travelled, prefix_len)
        steps = prefix_steps
        base_step = 0
        if not steps:
            return PlaybackState(step=0, pose=prefix[0], heading=0.0, travelled=travelled)
    else:
        d = (travelled - prefix_len) % loop_len
        steps = loop_steps
        base_step = len(prefix_steps)

    walked = 0.0
    for i, (a, b) in enumerate(steps):
        seg = dist(a, b)
        if walked + seg >= d or i == len(steps) - 1:
            t = 0.0 if seg == 0 else min(1.0, (d - walked) / seg)
            pose = Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
            heading = math.degrees(math.atan2(b.y - a.y, b.x - a.x))
            return PlaybackState(
                step=base_step + i, pose=pose, heading=heading, travelled=travelled
            )
        walked += seg
    raise AssertionError("unreachable")
