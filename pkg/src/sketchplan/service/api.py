"""HTTP facade: one endpoint per session operation, JSON bodies in the
module file formats, errors as {code, message}."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..geometry import Point, SamplingParams
from ..ltl.spec_graph import (
    SpecGraphFormatError,
    spec_graph_document,
    spec_graph_from_document,
)
from ..roadmap import Roadmap, RoadmapFormatError, roadmap_document, roadmap_from_document
from .sessions import ServiceError, SessionStore

EDGE_OPS_DOC = None


def _edge_ops_doc() -> dict:
    global EDGE_OPS_DOC
    if EDGE_OPS_DOC is None:
        from ..ltl.spec_graph import LEGAL_EDGE_OPS

        EDGE_OPS_DOC = {
            "allowed": sorted(
                [list(combo) for combo in LEGAL_EDGE_OPS],
                key=lambda c: [x or "" for x in c],
            )
        }
    return EDGE_OPS_DOC


def _stroke_points(body: dict) -> list[Point]:
    stroke = body.get("stroke")
    if not isinstance(stroke, list) or not stroke:
        raise ServiceError("bad_stroke", "body needs a non-empty 'stroke' list", 422)
    points = []
    for entry in stroke:
        try:
            points.append(Point(float(entry["x"]), float(entry["y"])))
        except (KeyError, TypeError, ValueError) as e:
            raise ServiceError("bad_stroke", f"bad stroke point: {e}", 422) from e
    return points


def _sampling_params(body: dict) -> SamplingParams | None:
    params = body.get("params")
    if params is None:
        return None
    try:
        return SamplingParams(
            d_m=float(params.get("d_m", 20.0)),
            theta_m=float(params.get("theta_m", 20.0)),
        )
    except (TypeError, ValueError) as e:
        raise ServiceError("bad_params", str(e), 422) from e


def create_app(store: SessionStore | None = None) -> FastAPI:
    store = store or SessionStore()
    app = FastAPI(title="sketchplan service")

    @app.exception_handler(ServiceError)
    async def service_error_handler(_req: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    def parse_roadmap_body(body) -> Roadmap:
        try:
            return roadmap_from_document(body)
        except RoadmapFormatError as e:
            raise ServiceError("bad_document", str(e), 422) from e

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.json() if await _has_body(request) else {}
        roadmap = None
        if isinstance(body, dict) and body.get("roadmap") is not None:
            roadmap = parse_roadmap_body(body["roadmap"])
        elif isinstance(body, dict) and body.get("image") is not None:
            image = body["image"]
            try:
                roadmap = Roadmap(
                    image_path=str(image["path"]),
                    image_size=(int(image["width"]), int(image["height"])),
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ServiceError("bad_document", f"bad image: {e}", 422) from e
        session = store.create(roadmap)
        return {"id": session.id, "roadmap": roadmap_document(session.roadmap)}

    @app.get("/sessions/{sid}/roadmap")
    def get_roadmap(sid: str):
        session = store.get(sid)
        with session.lock:
            return roadmap_document(session.roadmap)

    @app.put("/sessions/{sid}/roadmap")
    async def put_roadmap(sid: str, request: Request):
        session = store.get(sid)
        roadmap = parse_roadmap_body(await request.json())
        store.replace_roadmap(session, roadmap)
        return roadmap_document(roadmap)

    @app.post("/sessions/{sid}/edits")
    async def post_edits(sid: str, request: Request):
        session = store.get(sid)
        body = await request.json()
        edits = body if isinstance(body, list) else [body]
        roadmap = store.apply_edits(session, edits)
        return roadmap_document(roadmap)

    @app.post("/sessions/{sid}/sketches")
    async def post_sketch(sid: str, request: Request):
        session = store.get(sid)
        body = await request.json()
        if not isinstance(body, dict):
            raise ServiceError("bad_stroke", "body must be an object", 422)
        record = store.submit_sketch(
            session, _stroke_points(body), _sampling_params(body)
        )
        return {
            "sampled_path": {
                "points": [{"x": p.x, "y": p.y} for p in record.sampled.points],
                "q_start": record.sampled.q_start,
                "q_end": record.sampled.q_end,
            },
            "walk": list(record.walk),
            "cwpd": record.cwpd,
            "bmp_ms": record.bmp_ms,
        }

    @app.put("/sessions/{sid}/spec")
    async def put_spec(sid: str, request: Request):
        session = store.get(sid)
        try:
            spec = spec_graph_from_document(await request.json())
        except SpecGraphFormatError as e:
            raise ServiceError("bad_document", str(e), 422) from e
        store.put_spec(session, spec)
        return spec_graph_document(spec)

    @app.post("/sessions/{sid}/plan")
    def post_plan(sid: str):
        session = store.get(sid)
        _plan, doc = store.compute_plan(session)
        return doc

    @app.get("/sessions/{sid}/plan")
    def get_plan(sid: str):
        session = store.get(sid)
        return store.get_plan(session)

    @app.post("/sessions/{sid}/playback/step")
    async def playback_step(sid: str, request: Request):
        session = store.get(sid)
        body = await request.json()
        try:
            dt = float(body.get("dt", 0.0))
        except (TypeError, ValueError) as e:
            raise ServiceError("bad_dt", str(e), 422) from e
        state = store.playback_step(session, dt)
        return {
            "step": state.step,
            "pose": {"x": state.pose.x, "y": state.pose.y, "heading": state.heading},
        }

    @app.get("/edge-ops")
    def edge_ops():
        return _edge_ops_doc()

    return app


async def _has_body(request: Request) -> bool:
    body = await request.body()
    return bool(body)


app = create_app()
